import logging

from commands.options import add_run_flags, raw_config
from run_config import resolve_config
from sim_engine import run_simulation

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="grow a graph from a seed and write the run")
    add_run_flags(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args):
    config = resolve_config(raw_config(args))
    logger.info(f"Simulating {config.scenario.name}: {config.rounds} rounds, P={config.ports}, "
                f"seed={config.rng_seed}, backend={config.backend.kind}")
    graph, manifest = run_simulation(config, config.out_dir)
    final = manifest.final_counts
    print(f"{config.scenario.name}: {len(manifest.rounds)} rounds ({manifest.termination_cause}), "
          f"{final['actors']} actors, {final['items']} items, {final['edges']} edges -> {config.out_dir}")
    return 0
