"""Command-line interface: ``plot pseudocolor | errors | profile | table``."""

from __future__ import annotations

import argparse
import sys

from .figures import error_curves, line_profile, pseudocolor, rel_entropy_table


def _build_parser():
    ap = argparse.ArgumentParser(prog="plot", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("pseudocolor", help="filled-color map of a 2D snapshot variable")
    pc.add_argument("snapshot", help="snapshot CSV path")
    pc.add_argument("--var", default="rho")
    pc.add_argument("--out", required=True, help="output image path")

    er = sub.add_parser("errors", help="log-log E1..E6 curves from an error report")
    er.add_argument("report", help="error-report CSV path")
    er.add_argument("--var", default="rho")
    er.add_argument("--out", required=True)

    pr = sub.add_parser("profile", help="1D line profile of a snapshot variable")
    pr.add_argument("snapshot")
    pr.add_argument("--var", default="rho")
    pr.add_argument("--out", required=True)

    tb = sub.add_parser("table", help="print the relative-entropy table row")
    tb.add_argument("report")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "pseudocolor":
            pseudocolor(args.snapshot, args.var, args.out)
        elif args.command == "errors":
            error_curves(args.report, args.var, args.out)
        elif args.command == "profile":
            line_profile(args.snapshot, args.var, args.out)
        elif args.command == "table":
            print(rel_entropy_table(args.report))
    except (ValueError, OSError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
