"""Command-line entry point: one subcommand per experiment.

Exit codes::

    0  success
    1  other package error
    2  bad arguments or configuration
    3  numerical failure (indefinite matrix, no convergence)
    4  solvers disagree
    5  infeasible or incompatible size
    6  I/O error
"""

import argparse
import sys

from .errors import (
    ConsistencyFailure,
    ConvergenceFailure,
    DefinitenessFailure,
    EllipticityViolation,
    EvaluationError,
    FeasibilityError,
    GridIncompatible,
    InvalidArgument,
    LowModeError,
    NyquistViolation,
)
from .experiments.config import EXPERIMENTS, OUT_ENV, load_config, make_config

EXIT_CODES = (
    (ConsistencyFailure, 4),
    ((DefinitenessFailure, ConvergenceFailure), 3),
    ((FeasibilityError, GridIncompatible), 5),
    ((InvalidArgument, NyquistViolation, EllipticityViolation, EvaluationError), 2),
    (LowModeError, 1),
    (OSError, 6),
)


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowmode",
        description="Regenerate the spectral low-mode experiments as CSV tables and SVG plots.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="key = value run configuration file")
        p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV})")
        p.add_argument("--paper-scale", action="store_true", help="use the full published grid sizes")
        p.add_argument("--seed", type=_u64, help="random seed (unsigned 64-bit)")
        p.add_argument("--threads", type=_positive, help="BLAS threads (default 1)")
        p.add_argument("--grids", type=_ints, help="comma-separated interior sizes m")
        p.add_argument("--cutoffs", type=_ints, help="comma-separated spectral cutoffs M")
        p.add_argument("--repetitions", type=_positive, help="timing repetitions (median is reported)")
        p.add_argument("--problem", help="example1, example2 or laplace")
    return parser


def _config_from_args(args):
    overrides = dict(out_dir=args.out, seed=args.seed, threads=args.threads, grids=args.grids,
                     cutoffs=args.cutoffs, repetitions=args.repetitions, problem=args.problem)
    if args.config:
        return load_config(args.config, experiment=args.experiment,
                           paper_scale=args.paper_scale, **overrides)
    return make_config(args.experiment, overrides, paper_scale=args.paper_scale)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from threadpoolctl import threadpool_limits

        from .experiments.runners import run_experiment

        config = _config_from_args(args)
        with threadpool_limits(limits=config.threads):
            table, paths = run_experiment(config)
    except Exception as exc:
        for kinds, code in EXIT_CODES:
            if isinstance(exc, kinds):
                print(f"lowmode {args.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
                return code
        raise
    print(f"{args.experiment}: {len(table)} rows, config {config.hash()[:12]}")
    for p in paths:
        print(f"  wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
