"""Main entry point for catamp.

This module parses the command line into a :class:`~src.config.RunSpec`,
configures structured logging, and dispatches to one of the subcommands:

- ``validate``: run the acceptance checks and print a PASS/FAIL table
- ``visibility``: sweep the analyzer phase and measure the visibility
- ``qgrid``: emit the idler-traced Q function on a phase-space grid
- ``variance``: compare naive and exact post-selected variances

Usage:
    catamp validate --only eq23
    catamp visibility --g 1.5 --alpha0 1,0 --out sweep.csv
    catamp variance --g 1.1 --alpha0 0,4 --phi pi/4

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O failure.

See Also:
    - :mod:`src.config` for configuration layering and value syntax
    - :mod:`src.commands.validate` for the acceptance checks
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import structlog

from src import __version__
from src.commands import EXIT_IO, EXIT_OK, EXIT_USAGE
from src.commands.output import OutputError
from src.commands.runners import run_qgrid, run_variance, run_visibility
from src.commands.validate import run_validate
from src.config import ConfigurationError, RunSpec, Subcommand

logger = structlog.get_logger(__name__)

COMMANDS: dict[Subcommand, Callable[[RunSpec], int]] = {
    Subcommand.VALIDATE: run_validate,
    Subcommand.VISIBILITY: run_visibility,
    Subcommand.QGRID: run_qgrid,
    Subcommand.VARIANCE: run_variance,
}

# Flags carried as raw strings and parsed by RunSpec.apply.
VALUE_FLAGS = (
    ("--g", "amplifier gain g ≥ 1"),
    ("--alpha0", "input amplitude as 're,im'"),
    ("--phi", "conditional phase (radians or e.g. pi/2)"),
    ("--theta", "analyzer phase for qgrid post_analyzer"),
    ("--theta-steps", "number of θ samples on [0, 2π)"),
    ("--mode", "post-selection: branch_drop or homodyne_window"),
    ("--threshold", "homodyne acceptance threshold on signal x"),
    ("--dims", "truncation 'N' or 'Ns,Ni'"),
    ("--out", "data file; the summary goes next to it as .summary.json"),
    ("--format", "data format: csv or json"),
    ("--stage", "qgrid stage: prep, post_amplifier or post_analyzer"),
    ("--input", "qgrid input: cat or coherent"),
    ("--grid", "qgrid points 'N' or 'Nx,Ny'"),
    ("--re-range", "qgrid Re α range 'lo,hi'"),
    ("--im-range", "qgrid Im α range 'lo,hi'"),
    ("--metrics-out", "validate: write Prometheus metrics to this file"),
)


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on usage errors."""

    def error(self, message: str):  # type: ignore[override]
        raise ConfigurationError(message)


def _join_values(argv: Sequence[str]) -> list[str]:
    """Attach each value flag to its value as "--flag=value".

    argparse treats a separate value such as "-pi/4" or "-1,0" as an option.
    """
    value_flags = {flag for flag, _ in VALUE_FLAGS}
    joined: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in value_flags:
            value = next(tokens, None)
            if value is None or value.startswith("--"):
                joined.append(token)
                if value is not None:
                    joined.append(value)
                continue
            token = f"{token}={value}"
        joined.append(token)
    return joined


def _build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False, allow_abbrev=False)
    for flag, help_text in VALUE_FLAGS:
        common.add_argument(flag, default=None, help=help_text)
    common.add_argument("--only", action="append", default=None, help="validate: check name")
    common.add_argument("--config", type=Path, default=None, help="'key = value' config file")
    common.add_argument("--normalize", action="store_true", help="report renormalized moments")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    parser = _ArgumentParser(
        prog="catamp",
        allow_abbrev=False,
        description="Cat-state decoherence in an ideal linear optical amplifier",
    )
    parser.add_argument("--version", action="version", version=f"catamp {__version__}")
    subparsers = parser.add_subparsers(
        dest="subcommand", required=True, parser_class=_ArgumentParser
    )
    for subcommand in Subcommand:
        subparsers.add_parser(subcommand.value, parents=[common], allow_abbrev=False)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> RunSpec:
    """Parse the command line into a validated RunSpec.

    Raises:
        ConfigurationError: On unknown flags, malformed values or out-of-range parameters.
    """
    tokens = _join_values(argv if argv is not None else sys.argv[1:])
    namespace = _build_parser().parse_args(tokens)
    spec = RunSpec(subcommand=Subcommand(namespace.subcommand))
    if namespace.config is not None:
        spec.load_file(namespace.config)

    flags: dict[str, str] = {}
    for flag, _ in VALUE_FLAGS:
        value = getattr(namespace, flag.lstrip("-").replace("-", "_"))
        if value is not None:
            flags[flag.lstrip("-")] = value
    if namespace.only:
        flags["only"] = ",".join(namespace.only)
    if namespace.normalize:
        flags["normalize"] = "true"
    if namespace.verbose:
        flags["verbose"] = "true"
    spec.apply(flags, "command line")

    spec.resolve()
    spec.validate()
    return spec


def configure_logging(verbose: bool = False) -> None:
    """Configure structlog with JSON lines on stderr."""
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)
    logging.getLogger().setLevel(level)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand.

    Args:
        argv: Command-line arguments without the program name.

    Returns:
        Exit code.
    """
    try:
        spec = parse_args(argv)
    except ConfigurationError as e:
        print(f"catamp: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return int(e.code or EXIT_OK)

    configure_logging(spec.verbose)
    spec.log_config()

    try:
        return COMMANDS[spec.subcommand](spec)
    except ConfigurationError as e:
        print(f"catamp: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OutputError, OSError) as e:
        logger.error("Output error", error=str(e))
        print(f"catamp: error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:
        logger.exception("Unexpected error", error=str(e))
        return EXIT_USAGE


def run() -> None:
    """Run the command line."""
    sys.exit(main())


if __name__ == "__main__":
    run()
