"""
Logging Setup
JSON console logging plus an optional rotating log file
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import List, Optional, TextIO

from pythonjsonlogger import jsonlogger

from cli.config import LoggingSection

PLAIN_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

_installed: List[logging.Handler] = []


def setup_logging(
    config: Optional[LoggingSection] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure the root logger

    Replaces the handlers installed by an earlier call, so repeated calls
    (one per command, or per test) do not duplicate output.

    Args:
        config: `logging` section of the run configuration
        stream: Console stream, stderr by default

    Returns:
        The root logger
    """
    config = config or LoggingSection()
    root = logging.getLogger()
    for handler in _installed:
        root.removeHandler(handler)
        handler.close()
    _installed.clear()

    root.setLevel(getattr(logging, config.level))

    if config.json_format:
        formatter: logging.Formatter = jsonlogger.JsonFormatter(JSON_FORMAT)
    else:
        formatter = logging.Formatter(PLAIN_FORMAT)

    console = logging.StreamHandler(stream or sys.stderr)
    console.setLevel(getattr(logging, config.level))
    console.setFormatter(formatter)
    root.addHandler(console)
    _installed.append(console)

    if config.file:
        directory = os.path.dirname(config.file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        # rotate at max_bytes
        file_handler = RotatingFileHandler(
            config.file,
            maxBytes=config.max_bytes,
            backupCount=config.backup_count,
            encoding='utf-8',
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
        _installed.append(file_handler)

    return root
