import csv
import logging
import os
from dataclasses import asdict, fields

from agents.backend import MOCK
from commands.options import add_run_flags, csv_list, raw_config
from errors import ConfigError
from run_config import resolve_config
from sim_engine import SpeedupRow, measure_speedup

logger = logging.getLogger(__name__)

SPEEDUP_FILE = "speedup.csv"
DEFAULT_PORTS = "1,2,4,8,16,24"


def register(subparsers):
    parser = subparsers.add_parser("speedup", help="time per actor interaction across worker-slot counts")
    add_run_flags(parser)
    parser.add_argument("--ports-list", dest="ports_list", type=csv_list, default=csv_list(DEFAULT_PORTS),
                        help=f"comma-separated P values (default {DEFAULT_PORTS})")
    parser.set_defaults(handler=run)
    return parser


def run(args):
    config = resolve_config(raw_config(args))
    try:
        ports = [int(p) for p in args.ports_list]
    except ValueError:
        raise ConfigError(f"--ports-list must hold integers, got {args.ports_list}")
    if not ports or min(ports) < 1:
        raise ConfigError(f"--ports-list needs positive integers, got {args.ports_list}")
    if config.injected_latency_ms == 0 and config.backend.kind == MOCK:
        logger.warning("⚠️ mock backend without injected latency: timings measure scheduling overhead only")

    rows = measure_speedup(config, ports)
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, SPEEDUP_FILE)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=[field.name for field in fields(SpeedupRow)])
        writer.writeheader()
        writer.writerows(asdict(row) for row in rows)
    for row in rows:
        print(f"P={row.ports:>3}: {row.seconds_per_interaction * 1000:.1f} ms/interaction, "
              f"{row.reduction_pct:.1f}% reduction, peak {row.peak_in_flight} in flight")
    print(f"Speed-up table written to {path}")
    return 0
