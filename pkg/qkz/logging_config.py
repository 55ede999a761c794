"""
Logging for qkz
===============

Every module logs under the ``qkz`` namespace. ``setup_logging`` attaches a console
handler (the CLI passes a rich ``RichHandler``) and two size-rotated files:

- ``qkz.log``       plain text, or JSON when ``format = "json"``
- ``qkz.json.log``  always JSON, one object per line

Residuals and shell counts passed through ``log_with_context`` land in the ``extra``
field of the JSON records; numpy scalars and complex numbers are converted on the way.
"""

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

NAMESPACE = "qkz"
DEFAULT_LOG_DIR = Path.home() / ".qkz" / "logs"
TEXT_LOG = "qkz.log"
JSON_LOG = "qkz.json.log"

TEXT_FORMAT = "%(asctime)s | %(levelname)-8s | %(threadName)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


@dataclass
class LoggingConfig:
    """Settings for the qkz log handlers."""

    level: str = "INFO"
    format: str = "standard"  # standard | json
    log_dir: Optional[Path] = None
    max_file_size_mb: int = 10
    backup_count: int = 5
    # "algebra.bethe" -> "DEBUG"; the qkz. prefix is optional
    module_levels: Dict[str, str] = field(default_factory=dict)

    def directory(self) -> Path:
        return Path(self.log_dir) if self.log_dir else DEFAULT_LOG_DIR

    def threshold(self, verbose: bool = False) -> int:
        if verbose:
            return logging.DEBUG
        return getattr(logging, self.level.upper(), logging.INFO)


def _plain(value: Any) -> Any:
    """json.dumps fallback for numpy values and complex numbers."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class JSONFormatter(logging.Formatter):
    """One JSON object per record, with the context attached by log_with_context."""

    def format(self, record: logging.LogRecord) -> str:
        data: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc)
            .isoformat()
            .replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "thread": record.threadName,
        }
        if record.exc_info:
            data["exception"] = self.formatException(record.exc_info)
        context = getattr(record, "extra_data", None)
        if context is not None:
            data["extra"] = context
        return json.dumps(data, default=_plain)


class QKZLogger:
    """
    Process-wide owner of the qkz handlers.

    ``setup`` may be called repeatedly (each CLI invocation does); previous handlers are
    closed first so the rotating files are never opened twice.
    """

    _instance = None
    _initialized = False
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if QKZLogger._initialized:
            return
        self.config: Optional[LoggingConfig] = None
        self.handlers: List[logging.Handler] = []
        QKZLogger._initialized = True

    def setup(
        self,
        verbose: bool = False,
        config: Optional[LoggingConfig] = None,
        console_handler: Optional[logging.Handler] = None,
    ):
        """Attach console, text and JSON handlers to the ``qkz`` logger."""
        with self._lock:
            self.cleanup()
            self.config = config or LoggingConfig()
            level = self.config.threshold(verbose)
            log_dir = self.config.directory()
            log_dir.mkdir(parents=True, exist_ok=True)

            main_formatter: logging.Formatter = (
                JSONFormatter() if self.config.format == "json"
                else logging.Formatter(TEXT_FORMAT, datefmt=DATE_FORMAT)
            )
            root = logging.getLogger(NAMESPACE)
            root.setLevel(level)

            console = console_handler or logging.StreamHandler()
            if console.formatter is None:
                console.setFormatter(
                    main_formatter if console_handler is None
                    else logging.Formatter("%(name)s: %(message)s")
                )
            self._attach(root, console, level)
            self._attach(root, self._rotating(log_dir / TEXT_LOG, main_formatter), level)
            self._attach(root, self._rotating(log_dir / JSON_LOG, JSONFormatter()), level)

            for name, module_level in self.config.module_levels.items():
                logging.getLogger(_qualified(name)).setLevel(
                    getattr(logging, module_level.upper(), logging.INFO)
                )

            root.debug("Logging initialized: level=%s, dir=%s",
                       logging.getLevelName(level), log_dir)

    def _rotating(self, path: Path, formatter: logging.Formatter) -> RotatingFileHandler:
        handler = RotatingFileHandler(
            path,
            maxBytes=self.config.max_file_size_mb * 1024 * 1024,
            backupCount=self.config.backup_count,
        )
        handler.setFormatter(formatter)
        return handler

    def _attach(self, root: logging.Logger, handler: logging.Handler, level: int):
        handler.setLevel(level)
        root.addHandler(handler)
        self.handlers.append(handler)

    def cleanup(self):
        """Close and detach every handler added by setup."""
        root = logging.getLogger(NAMESPACE)
        for handler in self.handlers:
            root.removeHandler(handler)
            try:
                handler.close()
            except OSError:
                pass
        self.handlers.clear()

    def get_log_files(self) -> List[Path]:
        """Current and rotated qkz log files, sorted by name."""
        log_dir = self.config.directory() if self.config else DEFAULT_LOG_DIR
        if not log_dir.exists():
            return []
        return sorted(log_dir.glob("qkz*.log*"))


def _qualified(name: str) -> str:
    return name if name == NAMESPACE or name.startswith(NAMESPACE + ".") else f"{NAMESPACE}.{name}"


_logger_manager = QKZLogger()


def setup_logging(
    verbose: bool = False,
    config: Optional[LoggingConfig] = None,
    console_handler: Optional[logging.Handler] = None,
):
    """Configure qkz logging; call once per process or CLI invocation."""
    _logger_manager.setup(verbose, config, console_handler)


def get_logger(name: str) -> logging.Logger:
    """Logger under the qkz namespace."""
    return logging.getLogger(_qualified(name))


def get_log_files() -> List[Path]:
    return _logger_manager.get_log_files()


def log_with_context(logger: logging.Logger, level: int, message: str, **context):
    """Log ``message`` with ``context`` attached; it shows up in the JSON logs."""
    logger.log(level, message, extra={"extra_data": context})
