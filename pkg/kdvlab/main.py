"""
KdV Stability Lab - command-line entry point
"""

import sys
from typing import Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from kdvlab.cli.router import EXIT_BAD_CONFIG, EXIT_RUN_FAILED, build_parser
from kdvlab.core.errors import ConfigError, KdVLabError
from kdvlab.core.logging import setup_logging


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and dispatch to the subcommand handler

    Returns:
        0 ok, 1 bad configuration, 2 failure during the run
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        setup_logging()
        logger.error(f"Invalid arguments: {e}")
        return EXIT_BAD_CONFIG

    try:
        setup_logging(args.log_level)
        return args.handler(args)
    except (ValidationError, ConfigError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_BAD_CONFIG
    except KdVLabError as e:
        logger.error(f"Run failed: {e}")
        return EXIT_RUN_FAILED
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_BAD_CONFIG


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
