import argparse
import logging
import sys

from commands import COMMANDS
from errors import BackendError, SimulationError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3


def setup_logging(level="INFO", log_file=None):
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="w"))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="gag", description="Dynamic text-attributed social graph simulator")
    parser.add_argument("--log-level", dest="log_level", default="INFO")
    parser.add_argument("--log-file", dest="log_file")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    logging.info(f"Starting {args.command}...")
    try:
        return args.handler(args)
    except BackendError as e:
        logging.error(f"❌ backend failure: {e}")
        return EXIT_BACKEND
    except (SimulationError, OSError) as e:
        logging.error(f"❌ {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
