import logging
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import structlog
from structlog.contextvars import bind_contextvars, clear_contextvars, get_contextvars
from structlog.typing import EventDict, WrappedLogger

from .settings import get_settings


def numpy_values(logger: WrappedLogger, method_name: str, event_dict: EventDict) -> EventDict:
    """Turn numpy scalars and arrays into plain Python values before rendering"""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            event_dict[key] = value.tolist()
    return event_dict


def setup_logging(log_level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """JSON log records on stderr (and optionally a file), each carrying the bound run context"""

    settings = get_settings()
    level = log_level or settings.log_level
    file_path = Path(log_file) if log_file else Path(settings.log_file) if settings.log_file else None

    if file_path:
        file_path.parent.mkdir(parents=True, exist_ok=True)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            numpy_values,
            structlog.processors.JSONRenderer()
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    # stdout carries result tables
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(message)s",
        handlers=[
            logging.StreamHandler(sys.stderr),
            *([logging.FileHandler(file_path)] if file_path else [])
        ],
        force=True,
    )

    logging.getLogger("sqlalchemy.engine").setLevel(logging.WARNING)


def bind_run_context(**fields: Any) -> None:
    """Attach run fields (command, seed, m_rx, ...) to every later record of this run"""
    bind_contextvars(**{key: value for key, value in fields.items() if value is not None})


def run_context() -> dict:
    return get_contextvars()


def clear_run_context() -> None:
    clear_contextvars()


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance"""
    return structlog.get_logger(name)
