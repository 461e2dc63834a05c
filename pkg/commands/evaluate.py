import logging
import os

from commands.options import csv_list, default_folds, load_run
from metrics.report import METRICS_FILE, evaluate_graph

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("evaluate", help="structural metrics, CSVs and plots per fold")
    parser.add_argument("--graph", required=True, help="run directory holding nodes.jsonl and edges.tsv")
    parser.add_argument("--folds", type=csv_list, help="comma-separated fold names (default: the scenario's)")
    parser.add_argument("--report", help="report directory (default: <graph>/report)")
    parser.add_argument("--seed", type=int, default=0, help="seed for sampled diameters and baselines")
    parser.add_argument("--no-plots", dest="plots", action="store_false")
    parser.set_defaults(handler=run)
    return parser


def run(args):
    graph, spec = load_run(args.graph)
    names = args.folds or default_folds(graph, spec)
    out_dir = args.report or os.path.join(args.graph, "report")
    report = evaluate_graph(graph, names, out_dir, seed=args.seed, plots=args.plots)
    for name, entry in report.items():
        alpha = entry.get("alpha")
        alpha_text = f"{alpha:.3f}" if isinstance(alpha, float) else "—"
        print(f"{name}: n={entry['node_count']} m={entry['edge_count']} alpha={alpha_text} "
              f"valid={entry.get('valid')} c={entry.get('avg_clustering')}")
    print(f"Report written to {os.path.join(out_dir, METRICS_FILE)}")
    return 0
