"""Command-line front end.

Subcommands mirror the experiment pipeline: `gen` writes the synthetic
corpus, `run` evaluates default parameters, `vary-k` sweeps the expected
cluster count, `sweep1d` and `sweepnd` run the parameter studies, and
`report` aggregates records with a Kruskal-Wallis comparison.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import ClusterBenchError

_COMMANDS = {
    "gen": "generate the synthetic dataset corpus",
    "run": "default-parameter evaluation over a corpus",
    "vary-k": "accuracy versus the expected cluster count",
    "sweep1d": "one-parameter sweeps (gain statistics per parameter)",
    "sweepnd": "random multi-dimensional parameter sweeps",
    "report": "merge run records; Kruskal-Wallis across algorithms",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterbench",
        description="benchmark clustering algorithms on synthetic datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--workers", type=int, default=None, help="override worker count")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--data", default=None,
                       help="dataset directory (gen output); defaults to the config's data_dir")
        p.add_argument("--force", action="store_true",
                       help="allow overwriting existing output files")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = harness.load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out = args.out
        data_dir = args.data or cfg.data_dir or str(Path(cfg.out) / "datasets")
        if args.command == "gen":
            if args.data is not None:
                cfg.data_dir = args.data
            written = harness.cmd_gen(cfg, force=args.force)
        elif args.command == "run":
            written = harness.cmd_run(cfg, data_dir, force=args.force)
        elif args.command == "vary-k":
            written = harness.cmd_vary_k(cfg, data_dir, force=args.force)
        elif args.command == "sweep1d":
            written = harness.cmd_sweep1d(cfg, data_dir, force=args.force)
        elif args.command == "sweepnd":
            written = harness.cmd_sweepnd(cfg, data_dir, force=args.force)
        else:
            written = harness.cmd_report(cfg, data_dir, force=args.force)
    except ClusterBenchError as exc:
        print(f"clusterbench: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
