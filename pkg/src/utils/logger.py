import logging
import os
import sys
from typing import Optional


def _level_from_env() -> int:
    name = os.getenv("PREDICTOR_LOG_LEVEL", "INFO").upper()
    return getattr(logging, name, logging.INFO)


def setup_logger(name: str = "predictor", level: Optional[int] = None) -> logging.Logger:
    """
    Richtet einen einfachen Logger ein.

    Ausgabe geht nach stderr, damit stdout und Ergebnisdateien frei von
    Log-Zeilen bleiben.

    Args:
        name: Name des Loggers
        level: Log-Level (default: PREDICTOR_LOG_LEVEL oder INFO)

    Returns:
        Konfigurierter Logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level if level is not None else _level_from_env())

    # Verhindere doppelte Handler
    if logger.handlers:
        return logger

    console_handler = logging.StreamHandler(sys.stderr)

    # Format: [2025-01-15 14:30:45] INFO name - Nachricht
    formatter = logging.Formatter(
        '[%(asctime)s] %(levelname)s %(name)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)

    return logger


def set_global_level(level: int) -> None:
    """Setzt das Level aller bereits erzeugten Logger (z.B. für --verbose)."""
    os.environ["PREDICTOR_LOG_LEVEL"] = logging.getLevelName(level)
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and logger.handlers:
            logger.setLevel(level)
