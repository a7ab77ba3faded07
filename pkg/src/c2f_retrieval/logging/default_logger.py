import os
import sys
from typing import Optional

from loguru import logger

LEVEL_ENV = "C2F_LOG_LEVEL"

FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level}</level> | "
    "<cyan>{extra[logger_name]}</cyan> | "
    "<level>{message}</level>"
)

_sink = {"id": None}


def configure_logging(level: Optional[str] = None, serialize: bool = False) -> None:
    """
    (Re)install the single stderr sink.

    Parameters
    ----------
    level : str, optional
        Minimum level; defaults to ``$C2F_LOG_LEVEL`` or ``INFO``.
    serialize : bool, default=False
        Emit one JSON record per line instead of the coloured text format.
    """
    level = (level or os.environ.get(LEVEL_ENV) or "INFO").upper()
    # stdout is reserved for reports
    logger.remove()
    _sink["id"] = logger.add(
        sys.stderr,
        level=level,
        format=FORMAT,
        serialize=serialize,
    )


def get_logger(name: str = "c2f-retrieval", level: Optional[str] = None, serialize: bool = False):
    """
    Return a Loguru logger bound to ``name``.

    The sink is installed on first use; later calls keep the configured
    level unless ``level`` is given explicitly.
    """
    if level is not None or _sink["id"] is None:
        configure_logging(level, serialize=serialize)
    return logger.bind(logger_name=name)
