import logging
import os

from commands.options import csv_list, default_folds, load_run
from graph.folding import fold, save_folded
from sim_engine import FOLDS_DIR

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("fold", help="write folded networks of a saved graph")
    parser.add_argument("--graph", required=True, help="run directory holding nodes.jsonl and edges.tsv")
    parser.add_argument("--folds", type=csv_list, help="comma-separated fold names (default: the scenario's)")
    parser.add_argument("--out-dir", dest="out_dir", help="defaults to the graph directory")
    parser.set_defaults(handler=run)
    return parser


def run(args):
    graph, spec = load_run(args.graph)
    names = args.folds or default_folds(graph, spec)
    out_dir = os.path.join(args.out_dir or args.graph, FOLDS_DIR)
    for name in names:
        folded = fold(graph, name)
        save_folded(folded, os.path.join(out_dir, f"{name}.edges.tsv"))
        print(f"{name}: {folded.number_of_nodes()} nodes, {folded.number_of_edges()} edges")
    return 0
