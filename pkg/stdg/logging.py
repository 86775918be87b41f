"""
Module that controls stdg logging. Library modules log to child loggers of the
'stdg' logger; configure_logging() attaches JSON-lines handlers to it, based
on the 'logs' section of the run configuration.


Copyright 2024 stdg contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
import datetime
import json
import logging
import sys
from logging import handlers
from pathlib import Path

PACKAGE_LOGGER_NAME = 'stdg'


def _file_handler(settings: dict) -> logging.Handler:
    """
    Rotating JSON-lines log file

    Raises:
        ValueError: In case the directory of the log file does not exist
    """
    log_path = Path(settings['path'])
    if not log_path.absolute().parent.is_dir():
        raise ValueError(f'Invalid log path defined: {log_path}')
    return handlers.RotatingFileHandler(
        filename=log_path,
        maxBytes=settings['max_size_mb'] * 1024 * 1024,
        backupCount=settings['backup_count'],
    )


def _build_handlers(settings: dict) -> list[logging.Handler]:
    """
    Creates the handlers of the 'logs' configuration section, each with its
    level set

    Args:
        settings:
            The 'logs' section of a validated run configuration

    Returns:
        The console handler (stderr, since stdout is reserved for CSV output)
        and/or the file handler
    """
    built = []
    if 'console' in settings:
        console = logging.StreamHandler(sys.stderr)
        console.setLevel(settings['console']['level'])
        built.append(console)
    if 'file' in settings:
        file_handler = _file_handler(settings['file'])
        file_handler.setLevel(settings['file']['level'])
        built.append(file_handler)
    return built


def configure_logging(settings: dict) -> list[logging.Handler]:
    """
    Configure the 'stdg' package logger. Handlers added by an earlier call are
    removed first, so repeated runs in one process do not duplicate records.

    Args:
        settings: The 'logs' section of a validated run configuration

    Returns:
        The handlers that were attached

    Raises:
        ValueError: In case the log file directory does not exist
    """
    built = _build_handlers(settings)

    logger = logging.getLogger(PACKAGE_LOGGER_NAME)
    for handler in list(logger.handlers):
        if isinstance(handler.formatter, RunLogFormatter):
            logger.removeHandler(handler)
            handler.close()
    logger.propagate = False

    formatter = RunLogFormatter(source_name=settings['source_name'])
    for handler in built:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    if built:
        # records below every handler level are dropped at the logger
        logger.setLevel(min(handler.level for handler in built))
    return built


class RunLogFormatter(logging.Formatter):
    """
    Formats log records as JSON lines, with the 'details' passed through
    extra={'details': {...}} and the type and stdg error id of a logged
    exception

    Attributes:
        source_name:
            The value of the 'source' key for each log event
    """
    def __init__(self, *args, source_name: str, **kwargs):
        self.source_name = source_name
        super().__init__(*args, **kwargs)

    def error_info(self, record: logging.LogRecord) -> str | None:
        """
        Traceback and stack information of the record, if any
        """
        parts = []
        if record.exc_info:
            if not record.exc_text:
                record.exc_text = self.formatException(record.exc_info)
        if record.exc_text:
            parts.append(record.exc_text)
        if record.stack_info:
            parts.append(self.formatStack(record.stack_info))
        return '\n'.join(parts) if parts else None

    def format(self, record: logging.LogRecord) -> str:
        error_type = error_id = None
        if record.exc_info and record.exc_info[0] is not None:
            error_type = record.exc_info[0].__name__
            error_id = getattr(record.exc_info[1], 'id', None)

        created = datetime.datetime.fromtimestamp(
            record.created, tz=datetime.timezone.utc
        )
        return json.dumps(
            {
                'level': record.levelname,
                'date': created.isoformat(),
                'message': record.getMessage(),
                'source': self.source_name,
                'module': record.name,
                'details': getattr(record, 'details', None),
                'errorType': error_type,
                'errorId': error_id,
                'errorInfo': self.error_info(record),
            },
            ensure_ascii=False,
            default=str,
        )
