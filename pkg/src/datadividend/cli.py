"""Command line entry point: ``datadividend solve|sweep|verify``.

Exit status is 0 on success, 1 on an invalid config and 2 when a
verification batch has failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .sweep import (
    VERIFY_COLUMNS,
    ConfigError,
    load_config,
    rows_to_csv,
    run_solve,
    run_sweep,
    run_verify,
    to_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_VERIFY_FAILED = 0, 1, 2

SOLVE_COLUMNS = ("case", "level", "feasible", "regime", "I", "p0", "p1", "platform_utility", "user_utility")


def _solve_csv(report: dict) -> str:
    records = []
    for case in ("chosen", "case1", "case2"):
        sol = report["equilibrium"][case]
        d = sol["decision"] or {"I": None, "p0": None, "p1": None}
        records.append({"case": case, **{k: sol[k] for k in SOLVE_COLUMNS[1:4]}, **d,
                        "platform_utility": sol["platform_utility"], "user_utility": sol["user_utility"]})
    return to_csv(records, SOLVE_COLUMNS)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="datadividend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format):
        p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)

    common(sub.add_parser("solve", help="solve one instance"), "json")
    common(sub.add_parser("sweep", help="sweep one parameter"), "csv")
    p = sub.add_parser("verify", help="check the closed form against the brute-force oracle")
    common(p, "json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "solve":
            report = run_solve(cfg)
            _emit(_dump_json(report) if args.format == "json" else _solve_csv(report), args.out)
        elif args.command == "sweep":
            rows = run_sweep(cfg)
            if args.format == "csv":
                _emit(rows_to_csv(rows), args.out)
            else:
                _emit(_dump_json([r.as_record() for r in rows]), args.out)
        else:
            if args.seed < 0:
                raise ConfigError("--seed", "must be non-negative")
            summary = run_verify(cfg, args.instances, args.seed, args.jobs)
            if args.format == "json":
                _emit(_dump_json(summary), args.out)
            else:
                _emit(to_csv(summary["results"], VERIFY_COLUMNS), args.out)
            failed = summary["failed"]
            print(f"verify: {summary['passed']}/{summary['instances']} passed", file=sys.stderr)
            if failed:
                return EXIT_VERIFY_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
