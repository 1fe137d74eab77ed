"""
tensorlab command line

Minimal tensor norms, free-group walk counts and LPS representations as
reproducible experiments. Reports go to stdout or to a file; logs go to
stderr.

Exit status: 0 all contracts held, 1 contract violation, 2 usage error or
unsupported parameter, 3 report could not be written.
"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from tensorlab.config import get_environment_config, get_settings
from tensorlab.errors import (
    ContractViolationError,
    InstanceTooLargeError,
    InvalidArgumentError,
    LabError,
    ReportIOError,
    UnsupportedParameterError,
)
from tensorlab.models import ExperimentConfig, OutputFormat, Subcommand, WalkKind
from tensorlab.runner import run
from tensorlab.services.logging import get_logger, setup_logging
from tensorlab.services.report_writer import report_writer

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_USAGE = 2
EXIT_IO = 3

USAGE_ERRORS = (InvalidArgumentError, UnsupportedParameterError, InstanceTooLargeError)


def _add_common(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    parser.add_argument("--trials", type=int, default=1, help="independent trials")
    parser.add_argument("--tol", type=float, default=settings.SOLVER_TOL, help="solver tolerance on squared values")
    parser.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat],
                        default=OutputFormat.JSON.value, help="report format")
    parser.add_argument("--output", "-o", default=None,
                        help="report path; '-' for stdout (default: $TENSORLAB_OUTPUT_DIR or stdout)")
    parser.add_argument("--jobs", type=int, default=settings.JOBS, help="worker threads")
    parser.add_argument("--timings", action="store_true", help="record wall-clock ms per trial")
    parser.add_argument("--log-level", default=None, help="override the log level")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per experiment"""
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="tensorlab", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser(Subcommand.NORM.value, help="||sum u_i (x) conj(u_i)|| on Haar families")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--dim", type=int, default=4)
    _add_common(p)

    p = sub.add_parser(Subcommand.RANDCHECK.value, help="Haagerup slack and PSD form cross-validation")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--dim2", type=int, default=None, help="matrix size of the second family")
    _add_common(p)

    p = sub.add_parser(Subcommand.SZAREK.value, help="moments <(T*T)^m t, t> against pattern counts")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--m-max", dest="m_max", type=int, default=3)
    _add_common(p)

    p = sub.add_parser(Subcommand.WALKS.value, help="exact walk counts and growth estimates")
    p.add_argument("--gens", type=int, default=2)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--kind", choices=[k.value for k in WalkKind], default=WalkKind.IDENTITY.value)
    p.add_argument("--degree", type=int, default=None, help="tree degree for --kind tree")
    _add_common(p)

    p = sub.add_parser(Subcommand.ABSORB.value, help="absorption principle at the moment level")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--m-max", dest="m_max", type=int, default=3)
    _add_common(p)

    for name, helptext, cutoff in (
        (Subcommand.LPS.value, "irrep block norms of LPS generators", settings.DEGREE_CUTOFF),
        (Subcommand.CN.value, "cross tensor norms of LPS irrep blocks", settings.CROSS_DEGREE_CUTOFF),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--prime", type=int, default=5)
        p.add_argument("--degree-cutoff", dest="degree_cutoff", type=int, default=max(cutoff, 1))
        _add_common(p)

    return parser


def _configure_logging(level: Optional[str]) -> None:
    settings = get_settings()
    env = get_environment_config(settings.ENVIRONMENT)
    explicit = settings.model_fields_set
    log_level = level or (settings.LOG_LEVEL if "LOG_LEVEL" in explicit else env["LOG_LEVEL"])
    json_output = settings.LOG_JSON if "LOG_JSON" in explicit else env["LOG_JSON"]
    setup_logging(log_level, json_output)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the experiment and write the report

    Args:
        argv: Arguments without the program name (sys.argv[1:] by default)

    Returns:
        Exit status
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)

    values = {k: v for k, v in vars(args).items() if k != "log_level" and v is not None}
    try:
        config = ExperimentConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(x) for x in first.get("loc", ())) or "config"
        parser.print_usage(sys.stderr)
        print(f"tensorlab: error: {field}: {first.get('msg')}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = run(config)
        payload = report_writer.emit(report, config.output_format)
        path = report_writer.resolve_path(config.output, config.subcommand.value, config.seed, config.output_format)
        report_writer.write(payload, path)
    except USAGE_ERRORS as e:
        logger.error("usage_error", **e.to_dict())
        print(f"tensorlab: error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolationError as e:
        logger.error("contract_violation", **e.to_dict())
        return EXIT_CONTRACT
    except ReportIOError as e:
        logger.error("report_io_error", **e.to_dict())
        print(f"tensorlab: error: {e.message}: {e.details.get('error')}", file=sys.stderr)
        return EXIT_IO
    except LabError as e:
        logger.error("lab_error", **e.to_dict())
        return EXIT_CONTRACT

    if not report.ok:
        logger.error("contracts_violated", trials=report.summary.violations)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
