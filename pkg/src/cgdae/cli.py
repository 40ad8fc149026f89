"""Command line entry point: ``cgdae study ...``."""
from __future__ import annotations

import argparse
import sys

from .errors import CgDaeError
from .polybasis import FAMILIES
from .study import BASELINES, PROBLEMS, StudyConfig, run_study, write_csv

EXIT_FAILED = 2


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text: str) -> tuple:
    return tuple(item.strip() for item in text.split(",") if item.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgdae", description="Continuous Galerkin DAE time stepping")
    sub = parser.add_subparsers(dest="command", required=True)
    study = sub.add_parser("study", help="run a convergence study and write a CSV table")
    study.add_argument("--problem", required=True, choices=PROBLEMS)
    study.add_argument("--degrees", type=_int_list, default=(1, 2, 3))
    study.add_argument("--dt0", type=float, default=None, help="coarsest step size")
    study.add_argument("--levels", type=int, default=None, help="number of step sizes (halvings)")
    study.add_argument("--family", choices=FAMILIES, default="equispaced")
    study.add_argument("--c1", type=float, default=1.0)
    study.add_argument("--c2", type=float, default=1.0)
    study.add_argument("--baseline", type=_name_list, default=(),
                       help=f"comma-separated subset of {','.join(BASELINES)}")
    study.add_argument("--T", type=float, default=None, help="final time")
    study.add_argument("--ref-steps", type=int, default=None,
                       help="number of steps of the fine reference run")
    study.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = StudyConfig(problem=args.problem, degrees=args.degrees, dt0=args.dt0,
                          levels=args.levels, family=args.family, c1=args.c1, c2=args.c2,
                          baselines=args.baseline, T=args.T, ref_steps=args.ref_steps, out=args.out)
        table = run_study(cfg)
        write_csv(table, args.out)
    except (ValueError, OSError, CgDaeError) as exc:
        print(f"cgdae: error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if table.any_failed:
        bad = sum(row.failed for row in table.rows)
        print(f"cgdae: {bad} run(s) failed; see rows marked 'failed' in {args.out}", file=sys.stderr)
        return EXIT_FAILED
    return 0
