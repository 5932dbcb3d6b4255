"""Shared exceptions and numeric guards for the IGS solvers."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)

T = TypeVar("T")
U = TypeVar("U")

# Tolerances shared by several solver modules
RESIDUAL_TOL = 1e-8
ROOT_XTOL = 1e-12


class IgsError(Exception):
    """Base exception for solver and CLI errors."""

    pass


class DomainError(IgsError):
    """Parameters outside their valid domain."""

    pass


class ConfigurationError(IgsError):
    """Configuration-related errors."""

    pass


class InfeasibleScenarioError(IgsError):
    """The primary rate target cannot be met even without secondary interference."""

    def __init__(self, message: str, max_rate: Optional[float] = None):
        super().__init__(message)
        self.max_rate = max_rate


class DegenerateChannelError(IgsError):
    """The secondary channel matrix is (numerically) rank deficient."""

    def __init__(self, message: str, column: Optional[int] = None):
        super().__init__(message)
        self.column = column


class ScenarioFormatError(IgsError):
    """Malformed scenario file."""

    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class OracleRefusedError(IgsError):
    """Brute-force search would be too expensive."""

    def __init__(self, message: str, cost: Optional[float] = None):
        super().__init__(message)
        self.cost = cost


class VerificationError(IgsError):
    """The closed-form solver underperforms the brute-force oracle."""

    def __init__(self, message: str, delta: Optional[float] = None):
        super().__init__(message)
        self.delta = delta


def map_ordered(
    func: Callable[[T], U], items: Iterable[T], workers: int = 1
) -> List[U]:
    """Apply ``func`` to every item, in a process pool when workers > 1.

    Results come back in input order, so output never depends on scheduling.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def half_log2_ratio(numerator: ArrayLike, denominator: ArrayLike) -> np.ndarray:
    """Return 0.5*log2(numerator/denominator) with the ratio clamped at 1.

    Rates in this package are never negative; ratios that drop below one
    only do so through rounding at constraint-equality points.
    """
    ratio = np.asarray(numerator, dtype=float) / np.asarray(denominator, dtype=float)
    return 0.5 * np.log2(np.maximum(ratio, 1.0))


def log2_clamped(argument: ArrayLike) -> np.ndarray:
    """log2 of an argument that is mathematically >= 1."""
    return np.log2(np.maximum(np.asarray(argument, dtype=float), 1.0))
