"""Command line front end.

Usage:
    puccilab <subcommand> --config cfg.json --out results/ [--threads N] [--verbose]

Each subcommand runs one scenario tag from the config file; the tag
and the subcommand must agree, which catches copy-paste mistakes in
sweep batches.  Exit codes: 0 ran to completion (fail verdicts are
results, not errors), 1 validation problem, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import (
    AlignmentError,
    BlowUpError,
    BoundaryProximityError,
    CFLViolationError,
    ConfigError,
    ConvergenceError,
    DegenerateCylinderError,
    DegenerateFitError,
    FaceDataError,
    GridFileError,
    InputError,
    SingularGradientError,
)
from .config import load_config
from .scenarios import execute

__all__ = ["main"]

_SUBCOMMANDS = {
    "solve": "solve",
    "check": "class_check",
    "decay": "decay",
    "boundary": "boundary",
    "counterexample": "counterexample",
    "sweep-p": "p_sweep",
    "sweep-ellipticity": "ellipticity_sweep",
    "eps-continuation": "eps_sweep",
}

_VALIDATION_ERRORS = (
    ConfigError,
    InputError,
    AlignmentError,
    CFLViolationError,
    GridFileError,
    FaceDataError,
)

_NUMERICAL_ERRORS = (
    BlowUpError,
    ConvergenceError,
    DegenerateFitError,
    DegenerateCylinderError,
    SingularGradientError,
    BoundaryProximityError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="puccilab",
        description="Finite-difference studies of extremal parabolic operators.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, tag in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a '{tag}' scenario config")
        p.add_argument("--config", required=True, help="path to the JSON scenario config")
        p.add_argument("--out", required=True, help="directory for report files")
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="worker threads for sweep items (0 = auto)",
        )
        p.add_argument("--verbose", action="store_true", help="progress on stderr")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"puccilab: error: {exc}", file=sys.stderr)
        return 1

    expected_tag = _SUBCOMMANDS[args.subcommand]
    try:
        config = load_config(args.config)
        if config.scenario != expected_tag:
            raise ConfigError(
                f"config declares scenario {config.scenario!r} but the "
                f"'{args.subcommand}' subcommand runs {expected_tag!r}"
            )
        if args.verbose:
            print(f"running {config.scenario} from {args.config}", file=sys.stderr)
        paths = execute(config, args.out, threads=args.threads, verbose=args.verbose)
    except _NUMERICAL_ERRORS as exc:
        print(f"puccilab: numerical failure: {exc}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"puccilab: {exc}", file=sys.stderr)
        return 1

    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
