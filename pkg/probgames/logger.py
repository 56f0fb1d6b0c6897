import json
import logging
import sys
from collections.abc import Mapping, Set
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict, Optional

from probgames.utils import format_value


def loggable(value: Any) -> Any:
    """
    Converts a log payload into plain JSON values.

    Fractions keep their exact ``p/q`` form, distributions and other
    mappings become objects keyed by the CLI text of their keys, and
    sets are listed in sorted order so repeated runs log identical lines.
    """
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return format_value(value)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, Mapping):
        return {k if isinstance(k, str) else format_value(k): loggable(v) for k, v in value.items()}
    if isinstance(value, Set):
        return sorted(format_value(v) for v in value)
    if isinstance(value, list):
        return [loggable(v) for v in value]
    return format_value(value)


class JsonFormatter(logging.Formatter):
    """One JSON object per line: time, level, logger, message, then any payload."""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload = getattr(record, "data", None)
        if payload is not None:
            entry["data"] = loggable(payload)
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry)


def setup_logger(name: str, log_file: Optional[str] = None, level: str = "INFO") -> logging.Logger:
    """
    Configure the ``probgames`` logger tree.

    Command results are printed on stdout, so the console handler writes
    to stderr. Library modules log under children of ``name`` and inherit
    these handlers.

    Args:
        name: Root logger name, normally "probgames"
        log_file: Optional file that receives the same JSON lines
        level: Level name such as "INFO" or "DEBUG"; unknown names fall back to INFO

    Returns:
        logging.Logger: The configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    logger.propagate = False
    for handler in logger.handlers[:]:
        handler.close()
    logger.handlers = []

    targets = [logging.StreamHandler(sys.stderr)]
    if log_file:
        targets.append(logging.FileHandler(log_file))
    for handler in targets:
        handler.setFormatter(JsonFormatter())
        logger.addHandler(handler)
    return logger


def _extra(data: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    return {"data": data} if data else {}


def log_info(logger: logging.Logger, message: str, data: Optional[Dict[str, Any]] = None) -> None:
    logger.info(message, extra=_extra(data))


def log_warning(logger: logging.Logger, message: str, data: Optional[Dict[str, Any]] = None) -> None:
    logger.warning(message, extra=_extra(data))


def log_error(logger: logging.Logger, message: str, data: Optional[Dict[str, Any]] = None, exc_info: bool = True) -> None:
    """Logs at ERROR; the active traceback is attached unless ``exc_info`` is False."""
    logger.error(message, exc_info=exc_info, extra=_extra(data))


def log_verdict(logger: logging.Logger, game: str, verdict: Any) -> None:
    """Logs the outcome of an equilibrium check, at WARNING when it was rejected."""
    data = {"game": game, "holds": verdict.holds}
    if not verdict.holds:
        data.update(reason=verdict.reason, component=verdict.component)
        logger.warning("Profile rejected", extra=_extra(data))
    else:
        logger.info("Profile is an equilibrium", extra=_extra(data))
