#!/usr/bin/env python3
"""
RUNTIME CONFIGURATION
=====================

Environment overrides and logging setup. Precedence everywhere is
CLI flag > environment variable > module default.
"""

import logging
import os
from pathlib import Path
from typing import Optional

CACHE_DIR_ENV = "NLTU_CACHE_DIR"
DEBUG_ENV = "NLTU_DEBUG"
WORKERS_ENV = "NLTU_WORKERS"

DEFAULT_CACHE_DIR = Path(".nltu_cache")
DEFAULT_STATE_CAP = 10 ** 10
DEFAULT_BUDGET_CAP = 8

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def cache_dir(override: Optional[str] = None) -> Path:
    """Oracle cache location; safe to delete at any time."""
    if override:
        return Path(override)
    env = os.environ.get(CACHE_DIR_ENV)
    return Path(env) if env else DEFAULT_CACHE_DIR


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            logging.getLogger(__name__).warning("Ignoring non-integer %s=%r", WORKERS_ENV, env)
        else:
            if workers >= 1:
                return workers
    return os.cpu_count() or 1


def configure_logging(level: Optional[int] = None) -> None:
    """One stderr handler for the whole process."""
    if level is None:
        level = logging.DEBUG if os.environ.get(DEBUG_ENV) else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
