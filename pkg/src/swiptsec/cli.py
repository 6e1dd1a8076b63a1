"""Command-line front end.

Subcommands: `run <config>` executes a sweep described by an INI file and
writes the aggregate CSV; `oracle-check <config>` compares the solvers
against the exhaustive oracle on small random instances; `selftest` runs the
fast invariant battery. Exit codes: 0 success, 1 config error or failed
check, 2 I/O error, 3 guard-rail violation.
"""

from __future__ import annotations

import argparse
import sys

from . import validation
from .harness import ConfigError, parse_config, run_experiment, write_csv
from .oracle import GuardRailError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_GUARD = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptsec",
        description="Secrecy-constrained SWIPT power-splitting experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep config, write CSV")
    run_p.add_argument("config", help="INI experiment description")
    run_p.add_argument("--out", help="output CSV path (overrides config)")
    run_p.add_argument("--schemes",
                       help="comma/space separated subset of "
                            "ppa,pub,fps,fsa,oracle (overrides config)")
    run_p.add_argument("--seed", type=int, help="master seed (overrides)")
    run_p.add_argument("--trials", type=int,
                       help="Monte-Carlo trials per point (overrides)")

    oc_p = sub.add_parser("oracle-check",
                          help="solvers vs exhaustive oracle on small "
                               "instances")
    oc_p.add_argument("config", help="INI file; its seed and trial count "
                                     "steer the check")

    sub.add_parser("selftest", help="fast invariant battery")
    return parser


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.schemes is not None:
        cfg.schemes = tuple(args.schemes.replace(",", " ").split())
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.trials is not None:
        cfg.num_trials = args.trials
    if args.out is not None:
        cfg.out_path = args.out
    cfg.__post_init__()  # re-validate after overrides
    rows = run_experiment(cfg)
    write_csv(rows, cfg.out_path)
    print(f"wrote {cfg.out_path} ({len(rows)} rows, "
          f"{cfg.num_trials} trials/point)")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    cfg = parse_config(args.config)
    n = min(max(cfg.num_trials, 5), 50)
    ok = validation.oracle_check(num_instances=n, seed=cfg.master_seed)
    return EXIT_OK if ok else EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "oracle-check":
            return _cmd_oracle_check(args)
        return EXIT_OK if validation.selftest() else EXIT_CONFIG
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardRailError as e:
        print(f"guard rail: {e}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
