import logging
import math
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np
from scipy.signal import periodogram

from errors import BaselineZeroClustering, DegenerateDegrees, DegenerateSeries, NoConnectedPairs
from rng_streams import BASELINE, METRICS, derive_rng

logger = logging.getLogger(__name__)

EXACT_CAP = 2000
SAMPLED_SOURCES = 256
DENSE_CORE_FRACTIONS = tuple(x / 100 for x in range(1, 11))


def _undirected(graph):
    """networkx view of a folded graph, symmetrized when directed."""
    if isinstance(graph, (nx.Graph, nx.DiGraph)):
        return graph.to_undirected() if graph.is_directed() else graph
    return graph.to_undirected()


def avg_clustering(folded):
    G = _undirected(folded)
    if G.number_of_nodes() == 0:
        return 0.0
    return float(nx.average_clustering(G))


def assortativity(folded):
    G = _undirected(folded)
    degree = dict(G.degree())
    pairs = [(degree[u], degree[v]) for u, v in G.edges() if u != v]
    if not pairs:
        raise DegenerateDegrees("no edges to correlate")
    a = np.array([p[0] for p in pairs] + [p[1] for p in pairs], dtype=np.float64)
    b = np.array([p[1] for p in pairs] + [p[0] for p in pairs], dtype=np.float64)
    if np.std(a) == 0.0:
        raise DegenerateDegrees("all edge endpoints have the same degree")
    return float(np.corrcoef(a, b)[0, 1])


def distance_histogram(G, sources):
    counts = {}
    for source in sources:
        for target, d in nx.single_source_shortest_path_length(G, source).items():
            if d > 0:
                counts[d] = counts.get(d, 0) + 1
    return counts


def _interpolated_quantile(counts, quantile):
    distances = np.array(sorted(counts), dtype=np.float64)
    cumulative = np.cumsum([counts[d] for d in sorted(counts)])
    total = int(cumulative[-1])
    h = (total - 1) * quantile

    def value_at(position):
        return distances[np.searchsorted(cumulative, position, side="right")]

    lo, hi = math.floor(h), math.ceil(h)
    return float(value_at(lo) + (h - lo) * (value_at(hi) - value_at(lo)))


def effective_diameter(folded, quantile=0.9, exact_cap=EXACT_CAP, samples=SAMPLED_SOURCES, seed=0):
    """Interpolated `quantile` of shortest-path lengths over connected ordered pairs.
    Exact up to `exact_cap` nodes, otherwise from `samples` seeded BFS sources."""
    G = _undirected(folded)
    nodes = list(G.nodes())
    if len(nodes) <= exact_cap:
        sources = nodes
    else:
        rng = derive_rng(seed, METRICS)
        sources = [nodes[int(i)] for i in sorted(rng.choice(len(nodes), size=samples, replace=False))]
    counts = distance_histogram(G, sources)
    if not counts:
        raise NoConnectedPairs("no pair of nodes is connected")
    return _interpolated_quantile(counts, quantile)


def lcc_fraction(folded):
    G = _undirected(folded)
    n = G.number_of_nodes()
    if n == 0:
        raise ValueError("lcc_fraction of an empty graph")
    return max(len(c) for c in nx.connected_components(G)) / n


def friendship_paradox_fraction(folded):
    """Share of nodes with degree >= 1 whose neighbours have a strictly larger mean degree."""
    G = _undirected(folded)
    degree = dict(G.degree())
    eligible = [v for v in G if degree[v] >= 1]
    if not eligible:
        return 0.0
    # integer comparison: sum(neighbour degrees) / d > d
    paradox = sum(1 for v in eligible if sum(degree[u] for u in G[v]) > degree[v] * degree[v])
    return paradox / len(eligible)


def snr_periodicity(series):
    """Power of the strongest non-zero frequency against all the others, in dB."""
    x = np.asarray(series, dtype=np.float64)
    if len(x) < 8:
        raise DegenerateSeries(f"need at least 8 samples, got {len(x)}")
    if np.ptp(x) == 0.0:
        raise DegenerateSeries("constant series has no spectrum")
    _, power = periodogram(x, detrend="constant")
    power = power[1:]
    dominant = power.max()
    rest = power.sum() - dominant
    if rest <= 0.0:
        return math.inf
    return float(10.0 * np.log10(dominant / rest))


def cc_ratio(folded, baseline_kind, seed=0, samples=5):
    """Clustering of `folded` against the mean of `samples` matched ER or BA graphs."""
    from baselines import BaselineSpec, generate

    G = _undirected(folded)
    n = G.number_of_nodes()
    kbar = 2.0 * G.number_of_edges() / n if n else 0.0
    clustering = avg_clustering(G)
    reference = []
    for s in range(samples):
        baseline_seed = int(derive_rng(seed, BASELINE, s).integers(2 ** 31))
        reference.append(avg_clustering(generate(BaselineSpec(baseline_kind, n, kbar, seed=baseline_seed))))
    mean = float(np.mean(reference))
    if mean == 0.0:
        raise BaselineZeroClustering(f"matched {baseline_kind} graphs have zero clustering")
    return clustering / mean


def dense_core_profile(folded, fractions=DENSE_CORE_FRACTIONS, seed=0):
    """Effective diameter of the subgraph induced by the top x% highest-degree nodes."""
    G = _undirected(folded)
    order = sorted(G.degree(), key=lambda nd: -nd[1])
    rows = []
    for fraction in fractions:
        size = max(2, math.ceil(round(fraction * len(order), 9)))
        core = G.subgraph([node for node, _ in order[:size]])
        try:
            diameter = effective_diameter(core, seed=seed)
        except NoConnectedPairs:
            diameter = None
        rows.append((fraction, core.number_of_nodes(), diameter))
    return rows


@dataclass(frozen=True)
class StructureSummary:
    node_count: int
    edge_count: int
    avg_clustering: float
    assortativity: Optional[float]
    effective_diameter: Optional[float]
    lcc_fraction: Optional[float]


def structure_summary(folded, seed=0):
    G = _undirected(folded)
    try:
        r = assortativity(G)
    except DegenerateDegrees as e:
        logger.warning(f"⚠️ {getattr(folded, 'name', 'graph')}: assortativity undefined ({e})")
        r = None
    try:
        diameter = effective_diameter(G, seed=seed)
    except NoConnectedPairs:
        diameter = None
    return StructureSummary(
        node_count=folded.number_of_nodes(),
        edge_count=folded.number_of_edges(),
        avg_clustering=avg_clustering(G),
        assortativity=r,
        effective_diameter=diameter,
        lcc_fraction=lcc_fraction(G) if G.number_of_nodes() else None,
    )
