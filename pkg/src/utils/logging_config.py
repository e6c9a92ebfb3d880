"""
NC-Chern - Logging Configuration

This module provides centralized logging configuration for the command-line
tool. Console output goes to stderr so stdout stays free for result artifacts.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

import colorlog


CONSOLE_FORMAT = "%(log_color)s%(asctime)s | %(levelname)-8s | %(message)s"
FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "bold_red",
}


def setup_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    log_dir: Optional[Path] = Path("data/logs"),
) -> logging.Logger:
    """
    Configure application-wide logging.

    Args:
        level: Console logging level (default: INFO)
        log_file: Optional log file name (default: chern.log)
        log_dir: Directory for log files; None disables the file handler

    Returns:
        Root logger instance
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    console_handler = colorlog.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(
        colorlog.ColoredFormatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT, log_colors=LOG_COLORS)
    )
    root_logger.addHandler(console_handler)

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_dir / (log_file or "chern.log"),
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)  # Always capture debug to file
        file_handler.setFormatter(logging.Formatter(fmt=FILE_FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(file_handler)

    configure_module_loggers(level)
    return root_logger


def configure_module_loggers(default_level: int = logging.INFO) -> None:
    """
    Configure logging levels for specific modules.

    Args:
        default_level: Default logging level for application modules
    """
    app_modules = [
        "src.algebra",
        "src.builders",
        "src.calculators",
        "src.oracles",
        "src.writers",
        "src.utils",
    ]
    for module in app_modules:
        logging.getLogger(module).setLevel(min(default_level, logging.INFO))

    # Third-party libraries - reduce noise
    for lib in ("matplotlib", "numexpr"):
        logging.getLogger(lib).setLevel(logging.WARNING)


class LogContext:
    """
    Context manager for temporary logging level changes.

    Useful for silencing a noisy sweep or for verbose debugging of one stage.
    """

    def __init__(self, logger_name: str, level: int):
        self.logger = logging.getLogger(logger_name)
        self.new_level = level
        self.original_level: int = logging.NOTSET

    def __enter__(self) -> logging.Logger:
        self.original_level = self.logger.level
        self.logger.setLevel(self.new_level)
        return self.logger

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.logger.setLevel(self.original_level)
        return False
