import csv
import json
import logging
import math
import os
from dataclasses import asdict

import networkx as nx
import numpy as np
from matplotlib.figure import Figure

from errors import BaselineZeroClustering, DegenerateSeries, InsufficientTail, InvalidParams, NoConnectedPairs
from graph.folding import degrees, fold, get_fold_spec
from metrics.powerlaw import fit_power_law
from metrics.structure import (cc_ratio, dense_core_profile, effective_diameter, friendship_paradox_fraction,
                               lcc_fraction, snr_periodicity, structure_summary)

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
MISSING = "—"


def _finite(value):
    if value is None or isinstance(value, str):
        return value
    return float(value) if math.isfinite(value) else None


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _plot(path, title, xlabel, ylabel, x, y, loglog=False, scatter=False):
    figure = Figure(figsize=(5, 4), facecolor="#ffffff")
    ax = figure.add_subplot(111)
    if scatter:
        ax.scatter(x, y, s=6)
    else:
        ax.plot(x, y, marker="o", markersize=3)
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    figure.tight_layout()
    figure.savefig(path, dpi=100)


def degree_pdf(folded):
    counts = np.bincount(degrees(folded)) if folded.number_of_nodes() else np.zeros(0, dtype=np.int64)
    total = counts.sum()
    return [(k, counts[k] / total) for k in range(1, len(counts)) if counts[k] > 0]


def rounds_series(graph, fold_name, seed=0):
    """(round, nodes, edges, lcc_fraction, effective diameter) of the fold as the graph stood after each round."""
    rows = []
    for r in range(graph.current_round + 1):
        folded = fold(graph.until_round(r), fold_name)
        if folded.number_of_nodes() == 0:
            rows.append((r, 0, 0, None, None))
            continue
        try:
            diameter = effective_diameter(folded, seed=seed)
        except NoConnectedPairs:
            diameter = None
        rows.append((r, folded.number_of_nodes(), folded.number_of_edges(), lcc_fraction(folded), diameter))
    return rows


def fold_metrics(graph, fold_name, seed=0):
    folded = fold(graph, fold_name)
    summary = structure_summary(folded, seed)
    entry = {"fold": fold_name, "directed": folded.directed, "degree_mode": "total", **asdict(summary)}

    try:
        fit = fit_power_law(degrees(folded))
        entry.update(alpha=fit.alpha, alpha_approx=fit.alpha_approx, k_min=fit.k_min, d_k=fit.d_k,
                     n_tail=fit.n_tail, valid=fit.valid)
    except InsufficientTail as e:
        logger.warning(f"⚠️ {fold_name}: no power-law fit ({e})")
        entry.update(alpha=None, alpha_approx=None, k_min=2, d_k=None, n_tail=0, valid=False)

    entry["friendship_paradox_fraction"] = friendship_paradox_fraction(folded)
    for kind in ("ER", "BA"):
        try:
            entry[f"cc_ratio_{kind.lower()}"] = cc_ratio(folded, kind, seed) if folded.number_of_edges() else MISSING
        except (BaselineZeroClustering, InvalidParams):
            entry[f"cc_ratio_{kind.lower()}"] = MISSING

    series = rounds_series(graph, fold_name, seed)
    growth = np.diff([row[2] for row in series])
    try:
        entry["snr_db"] = _finite(snr_periodicity(growth))
    except DegenerateSeries:
        entry["snr_db"] = None
    dense = dense_core_profile(folded, seed=seed) if folded.number_of_nodes() else []
    return folded, {k: _finite(v) if isinstance(v, float) else v for k, v in entry.items()}, series, dense


def write_fold_artifacts(folded, series, dense, out_dir, plots=True):
    os.makedirs(out_dir, exist_ok=True)
    G = folded.to_undirected()

    pdf = degree_pdf(folded)
    _write_csv(os.path.join(out_dir, "degree_pdf_loglog.csv"), ["k", "P_k"], pdf)
    _write_csv(os.path.join(out_dir, "diameter_over_rounds.csv"), ["round", "D_e"],
               [(r, d) for r, _, _, _, d in series])
    _write_csv(os.path.join(out_dir, "lcc_over_rounds.csv"), ["round", "node_count", "edge_count", "lcc_fraction"],
               [(r, n, e, lcc) for r, n, e, lcc, _ in series])

    neighbor = nx.average_neighbor_degree(G)
    clustering = nx.clustering(G)
    labels = {node: str(node) for node in folded.node_ids}
    _write_csv(os.path.join(out_dir, "neighbor_degree_scatter.csv"), ["node", "degree", "avg_neighbor_degree"],
               [(labels[v], G.degree(v), neighbor[v]) for v in folded.node_ids])
    _write_csv(os.path.join(out_dir, "degree_clustering_scatter.csv"), ["node", "degree", "clustering"],
               [(labels[v], G.degree(v), clustering[v]) for v in folded.node_ids])
    _write_csv(os.path.join(out_dir, "dense_core.csv"), ["fraction", "nodes", "effective_diameter"], dense)

    if not plots:
        return
    if pdf:
        _plot(os.path.join(out_dir, "degree_pdf_loglog.png"), f"{folded.name} degree distribution", "k", "P(k)",
              [k for k, _ in pdf], [p for _, p in pdf], loglog=True, scatter=True)
    measured = [(r, d) for r, _, _, _, d in series if d is not None]
    if measured:
        _plot(os.path.join(out_dir, "diameter_over_rounds.png"), f"{folded.name} effective diameter", "round",
              "D_e", [r for r, _ in measured], [d for _, d in measured])
    if folded.node_ids:
        _plot(os.path.join(out_dir, "neighbor_degree_scatter.png"), f"{folded.name} neighbour degree", "degree",
              "mean neighbour degree", [G.degree(v) for v in folded.node_ids],
              [neighbor[v] for v in folded.node_ids], loglog=False, scatter=True)


def evaluate_graph(graph, fold_names, out_dir, seed=0, plots=True):
    """metrics.json plus per-fold CSVs (and PNGs) under `out_dir`."""
    os.makedirs(out_dir, exist_ok=True)
    report = {}
    for name in fold_names:
        get_fold_spec(name)
        folded, entry, series, dense = fold_metrics(graph, name, seed)
        write_fold_artifacts(folded, series, dense, os.path.join(out_dir, name), plots)
        report[name] = entry
        logger.info(f"Evaluated {name}: {entry['node_count']} nodes, {entry['edge_count']} edges")
    with open(os.path.join(out_dir, METRICS_FILE), "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True, ensure_ascii=False)
    return report
