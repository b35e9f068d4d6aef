import logging
import sys
from typing import Any, Optional

import structlog

from avcleanse.core.config import settings


_configured = False


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    # resolved per call so redirected streams are honoured
    return structlog.PrintLogger(file=sys.stderr)


def _configure_logger(level: Optional[str] = None, json_output: Optional[bool] = None) -> None:
    global _configured
    level_name = (level or settings.log_level).upper()
    numeric_level = getattr(logging, level_name, logging.INFO)
    use_json = settings.log_json if json_output is None else json_output

    renderer: Any = (
        structlog.processors.JSONRenderer()
        if use_json
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )
    _configured = True


def configure_logging(level: Optional[str] = None, json_output: Optional[bool] = None) -> None:
    """Reconfigure logging, e.g. from CLI flags"""
    _configure_logger(level, json_output)


def get_logger(name: Optional[str] = None) -> Any:
    if not _configured:
        _configure_logger()
    return structlog.get_logger(name if name else __name__)
