"""Base classes for verification checks."""

import logging
import time
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .. import __version__
from ..errors import QKZError

logger = logging.getLogger(__name__)

# Residuals of relations that must fail are compared against this floor.
FAILURE_THRESHOLD = 1e-2


@dataclass
class Outcome:
    """What a check measured for one set of inputs."""

    residuals: Dict[str, float] = field(default_factory=dict)
    expected_failures: Dict[str, float] = field(default_factory=dict)
    observations: Dict[str, Any] = field(default_factory=dict)
    work: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    # Per-residual tolerances overriding the check-wide one.
    tolerances: Dict[str, float] = field(default_factory=dict)


@dataclass
class CheckReport:
    """
    Result of one check invocation.

    Passes when every residual is at most its tolerance, every expected failure
    exceeds FAILURE_THRESHOLD and no error was raised. Observations are carried
    along without taking part in the verdict.
    """

    check: str
    inputs: Dict[str, Any]
    residuals: Dict[str, float]
    tolerance: float
    passed: bool
    wall_time: float
    seed: int
    version: str = __version__
    work: Dict[str, Any] = field(default_factory=dict)
    expected_failures: Dict[str, float] = field(default_factory=dict)
    observations: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    error: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=dict)

    @staticmethod
    def verdict(residuals: Dict[str, float], tolerance: float,
                expected_failures: Dict[str, float],
                tolerances: Optional[Dict[str, float]] = None) -> bool:
        tolerances = tolerances or {}
        return (
            all(np.isfinite(r) and r <= tolerances.get(name, tolerance)
                for name, r in residuals.items())
            and all(r > FAILURE_THRESHOLD for r in expected_failures.values())
        )

    def __str__(self) -> str:
        if self.error:
            return f"{self.check}: error: {self.error}"
        status = "pass" if self.passed else "FAIL"
        return f"{self.check}: {status} (worst residual {self.worst_residual:.3e})"

    @property
    def worst_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


class Check(ABC):
    """Base class for all checks."""

    tolerance: float = 1e-10

    def __init__(self, config: Any):
        self.config = config
        self.logger = logging.getLogger(f"qkz.{self.__class__.__name__}")

    @property
    @abstractmethod
    def name(self) -> str:
        """Check name."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """Check description."""
        pass

    @abstractmethod
    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        """Seeded inputs, one dict per invocation; every value is JSON-serialisable."""
        pass

    @abstractmethod
    def evaluate(self, executor=None, **inputs) -> Outcome:
        """Compute the residuals for one set of inputs."""
        pass

    def rng(self) -> np.random.Generator:
        """Generator seeded from the suite seed and the check name."""
        return np.random.default_rng([self.config.seed, zlib.crc32(self.name.encode())])

    def execute(self, executor=None, **inputs) -> CheckReport:
        """Run one invocation; library and guard errors become failed reports."""
        start = time.perf_counter()
        try:
            outcome = self.evaluate(executor=executor, **inputs)
        except (QKZError, ValueError) as e:
            self.logger.warning(f"{self.name} failed with {type(e).__name__}: {e}")
            return CheckReport(
                check=self.name,
                inputs=inputs,
                residuals={},
                tolerance=self.tolerance,
                passed=False,
                wall_time=time.perf_counter() - start,
                seed=self.config.seed,
                error=f"{type(e).__name__}: {e}",
            )
        passed = CheckReport.verdict(outcome.residuals, self.tolerance,
                                     outcome.expected_failures, outcome.tolerances)
        report = CheckReport(
            check=self.name,
            inputs=inputs,
            residuals=outcome.residuals,
            tolerance=self.tolerance,
            passed=passed,
            wall_time=time.perf_counter() - start,
            seed=self.config.seed,
            work=outcome.work,
            expected_failures=outcome.expected_failures,
            observations=outcome.observations,
            notes=outcome.notes,
            tolerances=outcome.tolerances,
        )
        self.logger.debug(str(report))
        return report

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"
