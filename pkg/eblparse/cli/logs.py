#!/usr/bin/env python3

from __future__ import annotations

import logging
import sys
from collections.abc import Callable

import coloredlogs

from eblparse.treebank import treebank


def log_exception(error: Exception, log_func: Callable) -> None:
    """Log an error as a single structured line.

    Args:
        error: Any python exception.
        log_func: The function used to log the error.
    """
    err_type = type(error).__name__
    if isinstance(error, treebank.InvariantViolation):
        err_type = f"{err_type}[{error.invariant}]"
    log_func(f"{err_type}: {error}")


def level_for(verbose: bool, quiet: bool) -> int:
    if verbose:
        return logging.DEBUG
    if quiet:
        return logging.WARNING
    return logging.INFO


def setup(level: int = logging.INFO) -> None:
    """Set up colored logging to standard error."""
    coloredlogs.install(
        level=level, fmt="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr
    )
