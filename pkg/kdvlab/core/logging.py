"""
Logging configuration using Loguru
"""

import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from loguru import logger
from kdvlab.core.config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function} - {message}"
RUN_LOG = "run.log"


def _check_level(level: str) -> str:
    """Upper-cased level name, ValueError if loguru does not know it"""
    name = level.upper()
    try:
        logger.level(name)
    except ValueError:
        raise ValueError(f"Unknown log level: {level!r}") from None
    return name


def setup_logging(level: Optional[str] = None):
    """Configure Loguru logger: stderr console, plus a rotating file in production"""

    level = _check_level(level or settings.LOG_LEVEL)

    # Remove default handler
    logger.remove()

    # stdout is reserved for JSON printed by the audit command
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=True)

    if settings.ENVIRONMENT == "production":
        logger.add(
            f"{settings.LOG_DIR}/kdvlab_{{time}}.log",
            rotation="500 MB",
            retention="10 days",
            level="INFO",
            format=FILE_FORMAT,
        )

    logger.debug(f"Logging initialized - Level: {level}, Environment: {settings.ENVIRONMENT}")


@contextmanager
def run_log(output_dir: Path, level: str = "INFO") -> Iterator[Path]:
    """
    Copy everything logged inside the block to <output_dir>/run.log

    The file is truncated on entry so a rerun into the same directory
    replaces the previous run's log.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / RUN_LOG
    handler_id = logger.add(path, level=_check_level(level), format=FILE_FORMAT, mode="w")
    try:
        yield path
    finally:
        logger.remove(handler_id)
