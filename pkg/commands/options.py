import json
import logging
import os

from errors import ParseError, SpecScenarioMismatch
from graph.bipartite import load_graph
from graph.folding import FOLD_SPECS, fold
from graph.scenario import get_scenario
from run_config import apply_override, deep_merge, load_config, set_key
from sim_engine import MANIFEST_FILE

logger = logging.getLogger(__name__)

# flag dest -> dotted config key
FLAG_KEYS = {
    "scenario": "scenario",
    "out_dir": "out_dir",
    "ports": "ports",
    "seed": "rng_seed",
    "backend": "backend.kind",
    "rounds": "rounds",
    "n_r": "srag.n_r",
    "n_f": "srag.n_f",
    "hub_rate": "activation.hub_rate",
    "rerank": "srag.rerank_enabled",
    "injected_latency_ms": "injected_latency_ms",
    "folds": "folds",
}


def csv_list(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def on_off(value):
    lowered = value.strip().lower()
    if lowered in ("on", "true", "1", "yes"):
        return True
    if lowered in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got '{value}'")


def add_run_flags(parser):
    parser.add_argument("--config", help="JSON run file merged over the defaults")
    parser.add_argument("--scenario", choices=["SC", "TC", "SoC"])
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--ports", type=int, help="parallel worker slots P")
    parser.add_argument("--seed", type=int, help="master rng seed")
    parser.add_argument("--backend", choices=["mock", "remote", "replay"])
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--n-r", dest="n_r", type=int, help="items recalled per query")
    parser.add_argument("--n-f", dest="n_f", type=int, help="preference filters used in fine reranking")
    parser.add_argument("--hub-rate", dest="hub_rate", type=float)
    parser.add_argument("--rerank", type=on_off, help="on or off")
    parser.add_argument("--injected-latency-ms", dest="injected_latency_ms", type=float)
    parser.add_argument("--folds", type=csv_list, help="comma-separated fold names")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key, e.g. --set srag.max_queries=2")


def raw_config(args):
    """Merged config dict: defaults < --config file < dedicated flags and --set overrides."""
    raw = load_config(args.config) if getattr(args, "config", None) else {}
    flags = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            set_key(flags, key, value)
    for assignment in getattr(args, "overrides", []) or []:
        apply_override(flags, assignment)
    return deep_merge(raw, flags)


def load_run(path):
    """Graph of a run directory, typed by the scenario recorded in its manifest when there is one."""
    manifest_path = os.path.join(path, MANIFEST_FILE)
    spec = None
    if os.path.exists(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as f:
            try:
                manifest = json.load(f)
            except ValueError as e:
                raise ParseError(f"{manifest_path}: {e}")
        name = (manifest.get("config") or {}).get("scenario")
        spec = get_scenario(name) if name else None
    if spec is None:
        return load_graph(path), None
    return load_graph(path, spec.action_kinds), spec


def default_folds(graph, spec):
    """The scenario's folds, or every fold the graph's edge kinds support."""
    if spec is not None:
        return list(spec.fold_specs)
    names = []
    for name in FOLD_SPECS:
        try:
            fold(graph, name)
        except SpecScenarioMismatch:
            continue
        names.append(name)
    return names
