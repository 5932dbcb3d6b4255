"""Logging utilities for the igs-smac commands and solvers."""

import logging
import time
from functools import wraps
from typing import Any, Callable, ParamSpec, TypeVar

logger = logging.getLogger(__name__)

P = ParamSpec("P")
R = TypeVar("R")


def log_command_call(func: Callable[P, R]) -> Callable[P, R]:
    """Log a CLI command: its keyword arguments, wall time and outcome.

    Arguments that were not given (None) are left out of the log line.
    """
    @wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        given = {key: value for key, value in kwargs.items() if value is not None}
        logger.info(f"Command: {func.__name__} {given}")
        start = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(
                f"Command {func.__name__} failed after {time.perf_counter() - start:.3f}s: "
                f"{type(e).__name__}: {e}"
            )
            raise
        logger.info(f"Command {func.__name__} finished in {time.perf_counter() - start:.3f}s")
        return result

    return wrapper


def log_solver_step(stage: str, **values: Any) -> None:
    """Log one solver iteration at DEBUG level."""
    if not logger.isEnabledFor(logging.DEBUG):
        return
    details = ", ".join(f"{key}={_short(value)}" for key, value in values.items())
    logger.debug(f"Solver step [{stage}]: {details}")


def log_bisection_result(
    label: str, iterations: int, lower: float, upper: float, converged: bool
) -> None:
    """Log the outcome of a bisection search at DEBUG level."""
    logger.debug(f"Bisection {label}: {iterations} iteration(s), converged={converged}")
    logger.debug(f"  Bracket: [{lower:.12g}, {upper:.12g}]")


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_short(v) for v in value) + "]"
    return str(value)
