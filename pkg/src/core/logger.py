"""
Centralized logging configuration.
Provides consistent logging across all modules.
"""

import logging
import sys
from pathlib import Path
from logging.handlers import RotatingFileHandler
from typing import Optional


ROOT_LOGGER_NAME = "workbench"
DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class WorkbenchLogger:
    """Centralized logger for the workbench; configures the root logger once."""

    _root: Optional[logging.Logger] = None

    @classmethod
    def configure(
        cls,
        log_file: Optional[str] = "logs/workbench.log",
        level: str = "INFO",
        max_bytes: int = 10485760,  # 10MB
        backup_count: int = 5,
        console_output: bool = True,
        fmt: str = DEFAULT_FORMAT,
    ) -> logging.Logger:
        """
        Configure the root workbench logger (replaces earlier handlers).

        Args:
            log_file: Path to log file, None disables file logging
            level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            max_bytes: Max log file size before rotation
            backup_count: Number of backup files to keep
            console_output: Whether to also log to console
            fmt: Record format string

        Returns:
            Configured root logger
        """
        logger = logging.getLogger(ROOT_LOGGER_NAME)
        logger.setLevel(getattr(logging, level.upper()))
        logger.handlers.clear()
        logger.propagate = False

        formatter = logging.Formatter(fmt, datefmt='%Y-%m-%d %H:%M:%S')

        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)

            file_handler = RotatingFileHandler(
                log_path,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding='utf-8'
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        if console_output:
            console_handler = logging.StreamHandler(sys.stdout)
            console_handler.setLevel(getattr(logging, level.upper()))
            console_handler.setFormatter(formatter)
            logger.addHandler(console_handler)

        cls._root = logger
        return logger

    @classmethod
    def get_logger(cls, name: str = ROOT_LOGGER_NAME) -> logging.Logger:
        """
        Get a child of the workbench logger, configuring defaults on first use.

        Args:
            name: Logger name (usually ``__name__``)

        Returns:
            Logger instance
        """
        if cls._root is None:
            cls.configure()
        if name == ROOT_LOGGER_NAME:
            return cls._root
        return cls._root.getChild(name)

    @classmethod
    def reset(cls):
        """Reset logger instance (useful for testing)."""
        if cls._root:
            for handler in list(cls._root.handlers):
                handler.close()
            cls._root.handlers.clear()
            cls._root = None


def configure_from_section(section: dict) -> logging.Logger:
    """Configure logging from the ``logging`` config section."""
    return WorkbenchLogger.configure(
        log_file=section.get('file', "logs/workbench.log"),
        level=section.get('level', "INFO"),
        max_bytes=section.get('max_bytes', 10485760),
        backup_count=section.get('backup_count', 5),
        console_output=section.get('console_output', True),
        fmt=section.get('format', DEFAULT_FORMAT),
    )


# Convenience function
def get_logger(name: str = ROOT_LOGGER_NAME) -> logging.Logger:
    """Get logger instance."""
    return WorkbenchLogger.get_logger(name)
