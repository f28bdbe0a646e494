"""Command-line interface: ``barofv run | study | report``.

Options may also come from an INI config file (section named after the
subcommand); explicit command-line flags win over config values.
"""

from __future__ import annotations

import argparse
import configparser
import sys

from .cases import CASE_NAMES, get_case
from .driver import rebuild_report, run_single, run_study
from .rusanov import RusanovParams
from .stab import NegativeDensity, StabParams, StepFailure


_DEFAULTS = {"kappa": 1.0, "scheme": "stab", "snapshots": 0, "threads": 1}


def _add_common(p, *, need_out=True):
    # defaults stay None so config-file values never override explicit flags
    p.add_argument("--case", choices=CASE_NAMES, help="benchmark case name")
    p.add_argument("--kappa", type=float, help="pressure scale for delta-shock")
    p.add_argument("--scheme", choices=("stab", "rusanov"))
    p.add_argument("--cfl", type=float, help="cfl_safety (stab) or cfl (rusanov)")
    p.add_argument("--eta-safety", type=float, dest="eta_safety")
    p.add_argument("--newton-tol", type=float, dest="newton_tol")
    p.add_argument("--t-end", type=float, dest="t_end", help="override final time")
    p.add_argument("--out", required=need_out, help="output directory")
    p.add_argument("--snapshots", type=int, help="write a snapshot every N steps")
    p.add_argument("--threads", type=int)
    p.add_argument("--config", help="INI config file; flags override its values")


def _build_parser():
    ap = argparse.ArgumentParser(prog="barofv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single run at one resolution")
    _add_common(run_p)
    run_p.add_argument("--k", type=int, help="cells per axis")

    study_p = sub.add_parser("study", help="multi-resolution convergence study")
    _add_common(study_p)
    study_p.add_argument("--k", help="comma-separated dyadic ladder, e.g. 32,64,128")
    study_p.add_argument("--ref-k", type=int, dest="ref_k", help="reference resolution")

    rep_p = sub.add_parser("report", help="re-derive the error report from snapshots")
    rep_p.add_argument("--out", required=True, help="study directory")
    return ap


def _apply_config(args, command):
    """Fill args still at None from the config file, then apply defaults."""
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        with open(args.config) as fh:
            cp.read_file(fh)
        casts = {
            "kappa": float, "cfl": float, "eta_safety": float, "newton_tol": float,
            "t_end": float, "snapshots": int, "threads": int, "ref_k": int,
        }
        if cp.has_section(command):
            for key, raw in cp[command].items():
                key = key.replace("-", "_")
                if getattr(args, key, None) is None:
                    setattr(args, key, casts.get(key, str)(raw))
    for key, value in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _params(args):
    stab_kwargs = {}
    rus_kwargs = {}
    if args.cfl is not None:
        stab_kwargs["cfl_safety"] = args.cfl
        rus_kwargs["cfl"] = args.cfl
    if getattr(args, "eta_safety", None) is not None:
        stab_kwargs["eta_safety"] = args.eta_safety
    if getattr(args, "newton_tol", None) is not None:
        stab_kwargs["newton_tol"] = args.newton_tol
    return StabParams(**stab_kwargs), RusanovParams(**rus_kwargs)


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)

    try:
        if args.command == "report":
            rebuild_report(args.out)
            return 0

        args = _apply_config(args, args.command)
        if args.case is None:
            ap.error("--case is required")
        case = get_case(args.case, kappa=args.kappa)
        stab_params, rus_params = _params(args)

        if args.command == "run":
            if not args.k:
                ap.error("--k is required for run")
            run_single(
                case, args.scheme, int(args.k), args.out,
                stab_params=stab_params, rus_params=rus_params,
                t_end=args.t_end, snapshots=args.snapshots,
            )
            return 0

        if args.command == "study":
            if not args.k or args.ref_k is None:
                ap.error("--k and --ref-k are required for study")
            ks = [int(v) for v in str(args.k).split(",") if v]
            run_study(
                case, ks, args.ref_k, args.out,
                stab_params=stab_params, rus_params=rus_params,
                t_end=args.t_end, scheme=args.scheme, threads=args.threads,
            )
            return 0
    except (StepFailure, NegativeDensity) as exc:
        print(f"barofv: solver failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"barofv: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
