"""
logging.py

This module provides a helper function to set up logging for treequery.
Console output goes to standard error so that command results printed on
standard output stay machine readable; a daily rotating file keeps the full
history for later review.

Key Concepts:
- Logger: Records messages about what the library is doing.
- Console and file output: Short messages on stderr, timestamped lines in a file.
- Log levels: Controlled by the LOG_LEVEL environment variable (DEBUG, INFO, ...).
- Log directory: LOG_DIR overrides the default 'logs' directory at the project root.

Example usage:
    from utils.logging import get_logger
    logger = get_logger(__name__)
    logger.info("OPT computed")
"""

import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

LOG_FILE_NAME = "treequery.log"


def _default_log_dir() -> str:
    # Project root is the parent of 'src'
    src_dir = os.path.dirname(os.path.dirname(__file__))
    project_root = os.path.abspath(os.path.join(src_dir, os.pardir))
    return os.path.join(project_root, "logs")


def get_logger(name: str) -> logging.Logger:
    """
    Returns a logger configured to output logs to stderr and to a file (with timestamp and log level).
    Log files are stored in LOG_DIR (default: 'logs' under the project root), one file per day.
    The log level is read from the LOG_LEVEL environment variable (default: INFO).
    """
    logger = logging.getLogger(name)
    log_level_str = os.getenv("LOG_LEVEL", "INFO").upper()
    log_level = getattr(logging, log_level_str, logging.INFO)
    logger.setLevel(log_level)
    if not logger.handlers:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(console_handler)

        log_dir = os.getenv("LOG_DIR") or _default_log_dir()
        try:
            os.makedirs(log_dir, exist_ok=True)
            file_handler = TimedRotatingFileHandler(
                os.path.join(log_dir, LOG_FILE_NAME), when="midnight", backupCount=14, encoding="utf-8"
            )
        except OSError as exc:
            logger.warning(f"File logging disabled ({log_dir}): {exc}")
        else:
            file_formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")
            file_handler.setFormatter(file_formatter)
            logger.addHandler(file_handler)
    return logger
