"""Command-line entry point.

Subcommands mirror the protocols and labs (verify-bandit, verify-strategy,
verify-game, lowcomm, lb-coin, lb-learning) plus `suite`, which runs the
acceptance matrix and exits 0 only if every criterion passes. Exit codes:
0 success / suite pass, 1 suite fail, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import acceptance, harness


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="JSON experiment config file")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--trials", type=int, default=None, help="override config trials")
    p.add_argument("--workers", type=int, default=None, help="parallel trial workers")
    p.add_argument("--out", default=None, help="write the report to this path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--transcripts", action="store_true",
                   help="include full transcripts in JSON reports")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smoothverify",
                                 description="verification protocols for smooth strategies")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in harness.EXPERIMENTS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    suite = sub.add_parser("suite", help="run the acceptance matrix")
    suite.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    suite.add_argument("--workers", type=int, default=1)
    suite.add_argument("--only", type=int, nargs="*", default=None,
                       help="criterion numbers to run (default: all)")
    return ap


def _run_experiment_command(args) -> int:
    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.trials is not None:
        cfg["trials"] = args.trials
    try:
        cfg = harness.validate_config(cfg)
        if cfg["experiment"] != args.command:
            raise harness.ConfigError(
                f"config is for {cfg['experiment']!r}, not {args.command!r}")
        report = harness.run_experiment(cfg, workers=args.workers,
                                        keep_transcripts=args.transcripts)
    except (harness.ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(report.summary(), sort_keys=True))
    if args.out:
        path = harness.emit_report(report, args.format, args.out,
                                   transcripts=args.transcripts)
        print(f"report written to {path}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "suite":
        only = set(args.only) if args.only else None
        results = acceptance.run_all(seed=args.seed, workers=args.workers, only=only)
        return 0 if all(r.passed for r in results) else 1
    return _run_experiment_command(args)


if __name__ == "__main__":
    sys.exit(main())
