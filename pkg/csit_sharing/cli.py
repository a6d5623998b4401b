"""Command line interface for the CSIT-sharing simulations."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .config import describe, load_config, resolve
from .core import FORMATS, emit, print_report, print_summary
from .diagram import generate_allocation_diagram
from .errors import ConfigError
from .experiments import EXPERIMENTS
from .experiments.feasibility import build_allocation

DEFAULT_FORMAT = "csv"
DEFAULT_WORKERS = 1


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Return parsed command line arguments."""

    parser = argparse.ArgumentParser(
        description="Simulate CSIT-sharing strategies for cooperating transmitters.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, experiment in EXPERIMENTS.items():
        sub = subparsers.add_parser(
            name,
            help=experiment.description,
            description=experiment.description,
            epilog="scenario file defaults:\n" + describe(experiment.defaults),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sub.add_argument("--config", dest="config_path", help="Scenario file with 'key = value' lines", default=None)
        if "seed" in experiment.defaults:
            sub.add_argument("--seed", type=int, default=None, help="Base seed (default: scenario file or built-in)")
        sub.add_argument("--out", dest="out_path", help="Optional path to write the result tables", default=None)
        sub.add_argument(
            "--format",
            choices=FORMATS,
            default=DEFAULT_FORMAT,
            help=f"Output format for --out (default: {DEFAULT_FORMAT})",
        )
        sub.add_argument(
            "--workers",
            type=int,
            default=DEFAULT_WORKERS,
            help=f"Worker processes for Monte-Carlo draws (default: {DEFAULT_WORKERS})",
        )
        sub.add_argument("--verbose", action="store_true", help="Log solver and allocation diagnostics")
        if name == "feasibility":
            sub.add_argument(
                "--diagram",
                dest="diagram_path",
                help="Render the CSIT allocation with Graphviz at the given path (requires graphviz)",
            )
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point used by ``python -m csit_sharing``."""

    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    experiment = EXPERIMENTS[args.command]

    try:
        overrides = load_config(args.config_path) if args.config_path else {}
        settings = resolve(experiment.defaults, overrides)
        if getattr(args, "seed", None) is not None:
            settings["seed"] = args.seed
        if args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}")
        reports = experiment.run(settings, args.workers)
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 2

    for report in reports:
        print_report(report)
        print()
    print_summary(reports)

    if args.out_path:
        try:
            paths = emit(reports, args.out_path, args.format)
        except (ValueError, OSError) as exc:
            print(f"Error: {exc}", file=sys.stderr)
            return 1
        except RuntimeError as exc:
            print(f"Failed to write results: {exc}", file=sys.stderr)
            return 2
        for path in paths:
            print(f"Results written to {path}")

    if getattr(args, "diagram_path", None):
        try:
            path = generate_allocation_diagram(build_allocation(settings), args.diagram_path)
            if path:
                print(f"Allocation diagram written to {path}")
            else:
                print("graphviz is not installed; diagram was not generated.")
        except (ValueError, RuntimeError) as exc:
            print(f"Failed to generate allocation diagram: {exc}", file=sys.stderr)

    return 0


__all__ = ["main", "parse_args"]
