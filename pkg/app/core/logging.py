"""
Logging helpers.

Every module obtains its logger through :func:`get_logger`; the CLI calls
:func:`configure_logging` once at start-up.
"""

from __future__ import annotations

import logging

from app.core.config import settings


def configure_logging(level: str | None = None) -> None:
    """Configure the root logger with the project format."""
    logging.basicConfig(level=(level or settings.LOG_LEVEL).upper(), format=settings.LOG_FORMAT, force=True)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
