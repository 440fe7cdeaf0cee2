"""
CLI Main Router
Aggregates all subcommand parsers
"""

import argparse

from kdvlab.cli.commands import audit, norms, simulate, spectrum
from kdvlab.core.errors import ConfigError

EXIT_OK = 0
EXIT_BAD_CONFIG = 1
EXIT_RUN_FAILED = 2


class LabArgumentParser(argparse.ArgumentParser):
    """Argument errors become ConfigError so they map to exit code 1"""

    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(
        prog="kdvlab",
        description="Numerical laboratory for the asymptotic stability of KdV solitons",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        type=str.upper,
        choices=["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"],
        help="Override LOG_LEVEL for this invocation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include subcommands
    simulate.register(subparsers)
    spectrum.register(subparsers)
    norms.register(subparsers)
    audit.register(subparsers)
    return parser
