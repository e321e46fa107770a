"""
Structured logging for runs.

Records go to stderr (stdout carries CLI listings) and optionally to a file,
as one JSON object per line or as a plain text line. Every record is stamped
with the id of the run that is active in the current context.

Environment: LOG_LEVEL, LOG_FORMAT (json or text), LOG_FILE (empty disables
the file), CONTAINER_ENV=true switches the defaults to json without a file.
"""

import contextvars
import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional

DEFAULT_LOG_FILE = 'floquet_emitter.log'

run_id_var = contextvars.ContextVar('run_id', default=None)

LEVEL_COLORS = {
    'DEBUG': '\033[36m',
    'INFO': '\033[32m',
    'WARNING': '\033[33m',
    'ERROR': '\033[31m',
    'CRITICAL': '\033[35m',
}
RESET = '\033[0m'


class RunIDFilter(logging.Filter):
    """Stamps records with the active run id unless one is already set"""

    def filter(self, record):
        if not getattr(record, 'run_id', None):
            record.run_id = run_id_var.get()
        return True


def _context(record: logging.LogRecord) -> Dict[str, Any]:
    return {key: getattr(record, key) for key in ('task', 'run_id') if getattr(record, key, None)}


class JSONFormatter(logging.Formatter):
    """One JSON object per record; extra fields are merged in at top level"""

    def format(self, record: logging.LogRecord) -> str:
        data = {
            'timestamp': datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            **_context(record),
            **getattr(record, 'extra_fields', {}),
        }
        if record.levelno == logging.DEBUG:
            data.update(module=record.module, function=record.funcName, line=record.lineno)
        if record.exc_info:
            data['exception'] = self.formatException(record.exc_info)
        return json.dumps(data, default=str)


class TextFormatter(logging.Formatter):
    """`time - logger - LEVEL - [task:x | run:y] - message - (k=v, ...)`"""

    def __init__(self, use_colors: Optional[bool] = None):
        super().__init__()
        self.use_colors = sys.stderr.isatty() if use_colors is None else use_colors

    def format(self, record: logging.LogRecord) -> str:
        level = record.levelname
        if self.use_colors:
            level = f"{LEVEL_COLORS.get(level, '')}{level}{RESET}"
        parts = [datetime.now(timezone.utc).strftime('%Y-%m-%d %H:%M:%S'), record.name, level]

        context = _context(record)
        if context:
            labels = {'task': 'task', 'run_id': 'run'}
            parts.append('[' + ' | '.join(f"{labels[k]}:{v}" for k, v in context.items()) + ']')
        parts.append(record.getMessage())
        extra = getattr(record, 'extra_fields', None)
        if extra:
            parts.append('(' + ', '.join(f"{k}={v}" for k, v in extra.items()) + ')')

        line = ' - '.join(parts)
        if record.exc_info:
            line += '\n' + self.formatException(record.exc_info)
        return line


def setup_logging(log_level: Optional[str] = None, log_format: Optional[str] = None,
                  log_file: Optional[str] = None) -> None:
    """Configure the root logger; arguments override the environment"""
    in_container = os.getenv('CONTAINER_ENV', '').lower() == 'true'
    log_level = (log_level or os.getenv('LOG_LEVEL', 'INFO')).upper()
    if log_format is None:
        log_format = os.getenv('LOG_FORMAT', 'json' if in_container else 'text').lower()
    if log_file is None:
        log_file = os.getenv('LOG_FILE', '' if in_container else DEFAULT_LOG_FILE)

    formatter = JSONFormatter() if log_format == 'json' else TextFormatter()
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        try:
            handlers.append(logging.FileHandler(log_file))
        except OSError as e:
            print(f"Warning: Could not create log file {log_file}: {e}", file=sys.stderr)
    for handler in handlers:
        handler.setFormatter(formatter)
        handler.addFilter(RunIDFilter())

    logging.basicConfig(level=getattr(logging, log_level, logging.INFO), handlers=handlers, force=True)
    logging.getLogger(__name__).debug(
        "Logging configured",
        extra={'extra_fields': {'log_level': log_level, 'log_format': log_format,
                                'log_file': log_file or 'disabled'}}
    )


def set_run_id(run_id: str) -> None:
    run_id_var.set(run_id)


def clear_run_id() -> None:
    run_id_var.set(None)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


def log_with_context(logger: logging.Logger, level: int, message: str,
                     task: Optional[str] = None, **extra_fields) -> None:
    """
    Log with a task tag and structured fields.

    Example:
        log_with_context(logger, logging.INFO, "Run complete", task="g2", wall_time_s=1.2)
    """
    extra: Dict[str, Any] = {}
    if task is not None:
        extra['task'] = task
    if extra_fields:
        extra['extra_fields'] = extra_fields
    logger.log(level, message, extra=extra)
