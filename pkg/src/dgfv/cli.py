"""Command-line entry point.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .errors import ConfigError, SolverError
from .harness import EXPERIMENTS, load_config, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgfv",
        description="Hybrid DG/subcell-FV Euler solver: experiment driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON configuration")
    run.add_argument("--config", required=True, help="path to a JSON configuration file")
    run.add_argument("--output", help="output directory (overrides the configuration)")
    run.add_argument("--paper-scale", action="store_true",
                     help="use the full-size grids of the long-running variants")
    run.add_argument("--seed", type=int, help="random seed recorded with the run")

    val = sub.add_parser("validate-config", help="parse and echo a configuration")
    val.add_argument("--config", required=True)

    sub.add_parser("list-experiments", help="print the available experiments")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for name in EXPERIMENTS:
                print(name)
            return 0
        cfg = load_config(args.config)
        if args.command == "validate-config":
            print(json.dumps(asdict(cfg), indent=2, sort_keys=True))
            return 0
        if getattr(args, "output", None):
            cfg.output_dir = args.output
        if getattr(args, "paper_scale", False):
            cfg.paper_scale = True
        if getattr(args, "seed", None) is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            cfg.seed = args.seed
        summary = run_experiment(cfg)
        print(json.dumps(summary, indent=2, sort_keys=True, default=str))
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
