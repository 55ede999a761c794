"""Exception hierarchy for qkz."""

from typing import Any, Dict, List, Optional, Sequence


class QKZError(Exception):
    """Base class for all qkz errors."""


class ShapeError(QKZError, ValueError):
    """Invalid tensor-space usage: digits, sites, arity or dimension caps."""


class PoleProximityError(QKZError, ValueError):
    """An argument lies within the pole guard of a singular point."""

    def __init__(self, what: str, argument: complex, distance: float, guard: float):
        self.what = what
        self.argument = argument
        self.distance = distance
        self.guard = guard
        super().__init__(
            f"{what}: argument {argument!r} is {distance:.3e} from a pole (guard {guard:.1e})"
        )


class DivergentProductError(QKZError, ValueError):
    """An infinite product was requested with |p| >= 1."""


class ConvergenceError(QKZError):
    """A lattice sum diverged or failed to converge."""

    def __init__(self, message: str, deltas: Sequence[float] = (), level: Optional[int] = None):
        self.deltas = list(deltas)
        self.level = level
        if level is not None:
            message = f"[level {level}] {message}"
        super().__init__(message)


class LimitNotConvergedError(QKZError):
    """Generators read off at U and U + 20 disagree."""


class GradingError(QKZError):
    """A vector is not an eigenvector of the weight operators."""

    def __init__(self, message: str, grades: Optional[List[Any]] = None):
        self.grades = grades or []
        super().__init__(f"{message}; support grades: {self.grades}")


class NullVectorError(QKZError):
    """A vector is numerically zero where a nonzero one is required."""


class ConfigError(QKZError):
    """Invalid suite configuration."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.details = details or {}
        super().__init__(message)
