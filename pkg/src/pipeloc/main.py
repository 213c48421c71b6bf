# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Main entry point for the pipeloc command-line tool.

This module is responsible for parsing command-line arguments, setting up the
main parser and its subparsers for each command, configuring log output, and
dispatching to the appropriate command function.
"""

import argparse
import logging
from pathlib import Path

from rich.logging import RichHandler

from . import __version__
from .batch import cmd_batch
from .evaluate import cmd_evaluate
from .localize import cmd_localize
from .simulate import cmd_simulate
from .utils import error_console
from .wrappers import error_handling


def setup_logging(verbose: bool = False):
    """Routes the library loggers through rich on standard error."""
    logger = logging.getLogger("pipeloc")
    logger.handlers.clear()
    logger.addHandler(RichHandler(console=error_console, show_path=False, show_time=False))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False


def build_parser() -> argparse.ArgumentParser:
    # --- Main Parser Setup ---
    parser = argparse.ArgumentParser(
        prog="pipeloc",
        description="Encoder and rangefinder fusion localization for in-pipe robots",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
        help="Show program's version number and exit",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Show debug log output"
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # --- Command Definitions ---
    # 'simulate' command
    parser_simulate = subparsers.add_parser(
        "simulate", help="Generate a labeled synthetic out-and-back run"
    )
    parser_simulate.add_argument("--config", type=Path, help="Run configuration file (TOML)")
    parser_simulate.add_argument("--seed", type=int, default=0, help="Random seed")
    parser_simulate.add_argument("--out", type=Path, required=True, help="Run directory to write")

    # 'localize' command
    parser_localize = subparsers.add_parser(
        "localize", help="Estimate the trajectory of a logged run"
    )
    parser_localize.add_argument("log", type=Path, metavar="LOG", help="Sensor log (JSON-lines)")
    parser_localize.add_argument("--config", type=Path, help="Run configuration file (TOML)")
    parser_localize.add_argument("--out", type=Path, required=True, help="Output directory")
    parser_localize.add_argument(
        "--allow-uncalibrated",
        action="store_true",
        help="Fall back to raw encoder odometry when no reading can anchor it",
    )

    # 'evaluate' command
    parser_evaluate = subparsers.add_parser(
        "evaluate", help="Score a trajectory against ground truth and block detections"
    )
    parser_evaluate.add_argument(
        "trajectory", type=Path, metavar="TRAJECTORY", help="Trajectory written by 'localize'"
    )
    parser_evaluate.add_argument("--truth", type=Path, required=True, help="Ground truth file")
    parser_evaluate.add_argument("--blocks", type=Path, help="Block detection events file")
    parser_evaluate.add_argument("--out", type=Path, required=True, help="Output directory")
    parser_evaluate.add_argument("--label", default="1", help="Run label used in the tables")

    # 'batch' command
    parser_batch = subparsers.add_parser(
        "batch", help="Simulate, localize and evaluate several seeded runs"
    )
    parser_batch.add_argument("--config", type=Path, help="Run configuration file (TOML)")
    parser_batch.add_argument("--seed", type=int, default=0, help="First seed")
    parser_batch.add_argument("--runs", type=int, default=7, help="Number of runs")
    parser_batch.add_argument("--jobs", type=int, default=1, help="Worker processes")
    parser_batch.add_argument("--out", type=Path, required=True, help="Batch directory to write")

    return parser


@error_handling
def main(argv: list[str] | None = None):
    """
    Parses arguments and executes the corresponding pipeloc command.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    # --- Command Dispatching ---
    match args.command:
        case "simulate":
            cmd_simulate(args.config, args.seed, args.out)
        case "localize":
            cmd_localize(args.log, args.config, args.out, args.allow_uncalibrated)
        case "evaluate":
            cmd_evaluate(args.trajectory, args.truth, args.blocks, args.out, args.label)
        case "batch":
            cmd_batch(args.config, args.seed, args.runs, args.out, args.jobs)
        case None:
            parser.print_help()


if __name__ == "__main__":
    main()
