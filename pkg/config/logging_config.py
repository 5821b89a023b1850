# config/logging_config.py

"""Logging setup for the command-line front end."""
import logging
import os
import sys
from typing import Optional


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure the root logger on the diagnostic stream.

    Args:
        level: Level name; falls back to VI_STAB_LOG_LEVEL, then WARNING
    """
    name = (level or os.getenv("VI_STAB_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
