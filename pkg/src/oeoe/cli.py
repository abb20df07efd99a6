"""Command-line interface.

Subcommands: ``run`` (one protocol run from a TOML config), ``sweep`` (a grid
of runs with aggregated statistics), ``verify`` (named acceptance suites), and
``list-suites``.  Exit codes: 0 success, 1 criterion failure, 2 configuration
error.  ``OEOE_THREADS`` caps sweep concurrency.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, OeoeError
from .suites import run_suite, suite_names

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oeoe",
                                     description="oracle-efficient online estimation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one protocol run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p_run.add_argument("--out", default=None, help="directory for log.csv / log.json")

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", required=True, help="TOML file with [[cells]] overrides")
    p_sweep.add_argument("--seeds", type=int, default=1)
    p_sweep.add_argument("--out", default=None)

    p_verify = sub.add_parser("verify", help="run a named acceptance suite")
    p_verify.add_argument("suite", help="suite name, or 'all'")
    p_verify.add_argument("--fast", action="store_true",
                          help="smaller Monte Carlo sizes, capped replay counts")

    sub.add_parser("list-suites", help="print available suite names")
    return parser


def _cmd_run(args) -> int:
    from .config import load_config, run_from_config

    log = run_from_config(load_config(args.config), seed=args.seed, out_dir=args.out)
    print(f"T={log.horizon} seed={log.seed} Est_On={log.online_error()!r}")
    if args.out:
        print(f"wrote {args.out}/log.csv and {args.out}/log.json")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .config import load_config, sweep

    base = load_config(args.config)
    grid = load_config(args.grid)
    cells = grid.get("cells")
    if not cells:
        raise ConfigError("grid file must contain at least one [[cells]] table")
    rows = sweep(base, cells, args.seeds, out_dir=args.out)
    failed = 0
    for row in rows:
        line = f"{row.cell} n={row.n_runs} mean={row.mean:.6g} stderr={row.stderr:.3g}"
        if row.failures:
            failed += 1
            line += f" FAILED={len(row.failures)} ({row.failures[0]})"
        print(line)
    if failed:
        print(f"{failed} cell(s) had failing runs", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _cmd_verify(args) -> int:
    names = suite_names() if args.suite == "all" else [args.suite]
    unknown = [n for n in names if n not in suite_names()]
    if unknown:
        print(f"unknown suite {unknown[0]!r}; available: {', '.join(suite_names())}",
              file=sys.stderr)
        return EXIT_CONFIG
    ok = True
    for name in names:
        report = run_suite(name, fast=args.fast)
        for line in report.lines():
            print(line)
        ok &= report.passed
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "list-suites":
            print("\n".join(suite_names()))
            return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OeoeError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
