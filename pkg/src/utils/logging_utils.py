import logging
import os
import sys
from typing import Any, Dict, Optional

from src.customlogger.custom_logger import CustomJsonFormatter

_ROOT_NAME = "svf"


class CustomLogger:
    """Logger wrapper that emits JSON records on stderr"""

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"{_ROOT_NAME}.{name}")

    def logjson(self, level: str, message: str, data: Optional[Dict[str, Any]] = None):
        """Log a message with structured JSON fields"""
        if isinstance(level, str):
            level = getattr(logging, level.upper())
        self.logger.log(level, message, extra={'json_obj': dict(data or {})})

    def log(self, level: int, message: str, exc_info=None):
        self.logger.log(level, message, exc_info=exc_info)

    def debug(self, message: str, exc_info=None):
        self.logger.debug(message, exc_info=exc_info)

    def info(self, message: str, exc_info=None):
        self.logger.info(message, exc_info=exc_info)

    def warning(self, message: str, exc_info=None):
        self.logger.warning(message, exc_info=exc_info)

    def error(self, message: str, exc_info=None):
        self.logger.error(message, exc_info=exc_info)

    def exception(self, message: str):
        """Log an exception with full traceback"""
        self.logger.exception(message)


def get_logger(name: str) -> CustomLogger:
    """Get a logger instance"""
    return CustomLogger(name)


def setup_logging(level: Optional[str] = None) -> None:
    """Attach the JSON formatter to the package root logger.

    Results are written to stdout by the CLI, so log records always go to
    stderr. Calling this twice replaces the handler instead of stacking one.
    """
    level_name = (level or os.getenv('LOG_LEVEL', 'WARNING')).upper()
    root = logging.getLogger(_ROOT_NAME)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(CustomJsonFormatter('%(message)s'))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.WARNING))
    root.propagate = False
