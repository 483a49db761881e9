"""Command line interface: run check files and emit text or JSON reports."""

from __future__ import annotations

import argparse
import sys

from . import frontend


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nplectic",
        description="exact checks for n-plectic structures, graded bracket "
                    "towers, and homotopy moment maps")
    sub = parser.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="run the checks in an input file")
    chk.add_argument("file", help="input file (UTF-8)")
    chk.add_argument("--json", action="store_true", help="emit the JSON report")
    chk.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    chk.add_argument("--max-arity", type=int, default=4,
                     help="default arity bound for bracket identity checks")
    chk.add_argument("--word-max", type=int, default=4,
                     help="default word-length bound for coalgebra checks")
    chk.add_argument("--sign-audit", action="store_true",
                     help="solve per-arity component signs instead of "
                          "assuming the printed ones")
    chk.add_argument("--anti-action", action="store_true",
                     help="check actions against the anti-morphism convention")
    chk.add_argument("--timings", action="store_true",
                     help="include row timings in the JSON report")
    args = parser.parse_args(argv)

    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = frontend.parse(text)
    except frontend.DslError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return 2

    def emit(row: frontend.ReportRow):
        if not args.json:
            print(f"[{row.status.upper():5}] #{row.id} {row.check}: {row.witness} "
                  f"({row.timing_ms:.1f} ms)")

    report = frontend.run(doc, seed=args.seed, max_arity=args.max_arity,
                          word_max=args.word_max, sign_audit=args.sign_audit,
                          anti_action=args.anti_action, emit=emit)
    if args.json:
        sys.stdout.write(frontend.report_json(report, timings=args.timings))
    return 0 if report.all_pass else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
