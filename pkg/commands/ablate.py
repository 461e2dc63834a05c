import csv
import logging
import os
from dataclasses import asdict, fields
from itertools import combinations

from commands.options import add_run_flags, raw_config
from errors import ConfigError
from graph.folding import fold
from metrics.structure import StructureSummary, structure_summary
from run_config import deep_merge, resolve_config
from sim_engine import run_simulation

logger = logging.getLogger(__name__)

ABLATION_FILE = "ablation.csv"
RECIPES = ("n_r", "hub_rate", "filters", "rerank")
N_R_SWEEP = (3, 5, 10, 20)
HUB_RATE_SWEEP = (0.0, 0.1, 0.2)


def register(subparsers):
    parser = subparsers.add_parser("ablate", help="one run per setting of an S-RAG ablation, shared seed")
    parser.add_argument("recipe", choices=RECIPES)
    add_run_flags(parser)
    parser.set_defaults(handler=run)
    return parser


def recipe_settings(recipe, spec):
    """(label, config patch) for every setting of a recipe."""
    if recipe == "n_r":
        return [(f"n_r={n}", {"srag": {"n_r": n}}) for n in N_R_SWEEP]
    if recipe == "hub_rate":
        return [(f"hub_rate={h:.2f}", {"activation": {"hub_rate": h}}) for h in HUB_RATE_SWEEP]
    if recipe == "filters":
        settings = []
        for size in range(len(spec.filter_items) + 1):
            for subset in combinations(spec.filter_items, size):
                label = "+".join(subset) or "none"
                settings.append((f"filters={label}",
                                 {"srag": {"filter_items": list(subset), "n_f": len(subset)}}))
        return settings
    if recipe == "rerank":
        return [("rerank=on", {"srag": {"rerank_enabled": True}}),
                ("rerank=off", {"srag": {"rerank_enabled": False}})]
    raise ConfigError(f"unknown recipe '{recipe}', expected one of {RECIPES}")


def ablate(recipe, base_raw):
    """Run every setting of `recipe` over `base_raw`; returns one row per (setting, fold)."""
    base = resolve_config(base_raw)
    rows = []
    for label, patch in recipe_settings(recipe, base.scenario):
        raw = deep_merge(base.raw, patch)
        raw["out_dir"] = os.path.join(base.out_dir, recipe, label.replace("=", "_"))
        config = resolve_config(raw)
        logger.info(f"Ablation {recipe}: {label} -> {config.out_dir}")
        graph, _ = run_simulation(config, config.out_dir)
        for name in config.folds or config.scenario.fold_specs:
            summary = structure_summary(fold(graph, name), config.rng_seed)
            rows.append({"recipe": recipe, "setting": label, "fold": name, **asdict(summary)})
    return rows


def write_ablation(rows, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    columns = ["recipe", "setting", "fold"] + [f.name for f in fields(StructureSummary)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Ablation table written to {path}")


def run(args):
    base_raw = raw_config(args)
    rows = ablate(args.recipe, base_raw)
    out_dir = resolve_config(base_raw).out_dir
    path = os.path.join(out_dir, args.recipe, ABLATION_FILE)
    write_ablation(rows, path)
    for row in rows:
        print(f"{row['setting']:>24} {row['fold']:>14}: n={row['node_count']} m={row['edge_count']} "
              f"c={row['avg_clustering']:.4f}")
    return 0
