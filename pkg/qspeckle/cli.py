"""Command-line entry point: ``qspeckle simulate|analyze|theory|frames``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from qspeckle.api import cmd_analyze, cmd_frames, cmd_simulate, cmd_theory
from qspeckle.config import load_config
from qspeckle.errors import AliasingError, ConfigError, DimensionError, ParameterError, QSpeckleError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_ALIASING = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-command per pipeline stage."""
    parser = argparse.ArgumentParser(prog="qspeckle", description="Biphoton speckle propagation simulator.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("simulate", "propagate an ensemble and write coincidence maps"),
        ("theory", "write predicted width curves and zone boundaries"),
        ("frames", "closed-loop test of the frame-based coincidence estimator"),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("--config", type=Path, default=None, help="YAML or JSON run configuration")
        sub.add_argument("--out", type=Path, required=True, help="output directory")
        sub.add_argument("--small", action="store_true", help="CI-speed preset: 512 x 20 um grid, 50 realizations")
        sub.add_argument("--seed", type=int, default=None, help="override the configured master seed")

    analyze = commands.add_parser("analyze", help="measure width curves of a simulated run")
    analyze.add_argument("--out", type=Path, required=True, help="run directory written by simulate")
    return parser


def run(args: argparse.Namespace) -> Path:
    """Dispatch parsed arguments to the matching API call."""
    if args.command == "analyze":
        return cmd_analyze(args.out)
    config = load_config(args.config, small=args.small, seed=args.seed)
    commands = {"simulate": cmd_simulate, "theory": cmd_theory, "frames": cmd_frames}
    return commands[args.command](config, args.out)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code.

    Exit codes: 0 success, 2 configuration or parameter error, 3 aliasing bound exceeded,
    4 I/O error, 1 any other failure.
    """
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        output = run(args)
    except (ValidationError, ConfigError, ParameterError, DimensionError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_CONFIG
    except AliasingError as exc:
        logger.error("%s", exc)
        return EXIT_ALIASING
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    except QSpeckleError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAILURE

    print(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
