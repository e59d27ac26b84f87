"""Loguru sink configuration."""

import sys
from typing import Optional

from loguru import logger

from src.core.config import LoggingSettings


def configure_logging(settings: LoggingSettings, level: Optional[str] = None,
                      log_file: Optional[str] = None) -> None:
    """Replace loguru's default sink with the configured stderr/file sinks."""
    logger.remove()
    effective = (level or settings.level).upper()
    logger.add(sys.stderr, level=effective, format=settings.format, colorize=False)

    path = log_file or settings.file
    if path:
        logger.add(path, level="DEBUG", format=settings.format,
                   rotation=settings.rotation, encoding="utf8")
        logger.debug(f"File logging enabled at {path}")
