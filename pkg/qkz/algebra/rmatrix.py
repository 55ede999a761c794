"""
R-matrices for U_q[sl(n)] and the Yang-Baxter check.

The constant R-matrix is

    R = sum_i E_ii (x) E_ii + q^-1 sum_{i!=j} E_ii (x) E_jj
        + (1 - q^-2) sum_{i>j} E_ij (x) E_ji

and the spectral one interpolates between the swap P at x = 0 and R at
x -> +inf:

    R(x) = (q s R - (q s)^-1 P R^-1 P) / (q s - (q s)^-1),   s = e^(x/2).
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from ..errors import PoleProximityError
from .tensorspace import LocalOperator, SpaceShape, materialize

logger = logging.getLogger(__name__)

CONDITION_WARNING = 1e8


@dataclass(frozen=True)
class QParams:
    """Deformation parameter, shift, local dimension and numerical guards."""

    q: complex
    kappa: complex = 1.6
    n: int = 2
    pole_guard: float = 1e-8
    # Exponent e of the Markov weights q^(e (alpha - 1)); -2 gives the printed trace.
    markov_exponent: int = 2

    def __post_init__(self):
        q = complex(self.q)
        if abs(q) == 0:
            raise ValueError("q must be nonzero")
        if abs(q * q - 1) < self.pole_guard:
            raise ValueError(f"q^2 = 1 is degenerate (q={self.q})")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if self.pole_guard <= 0:
            raise ValueError("pole_guard must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "kappa", complex(self.kappa))

    @property
    def p(self) -> complex:
        """Nome e^-kappa of the infinite products."""
        return cmath.exp(-self.kappa)

    def require_convergent_shift(self) -> None:
        if self.kappa.real <= 0:
            raise ValueError(f"Re(kappa) must be positive, got kappa={self.kappa}")

    def with_n(self, n: int) -> "QParams":
        return QParams(self.q, self.kappa, n, self.pole_guard, self.markov_exponent)


@dataclass(frozen=True)
class BoltzmannWeights:
    b: complex
    c_plus: complex
    c_minus: complex


def _denominator(x: complex, params: QParams, what: str) -> complex:
    s = cmath.exp(x / 2)
    q = params.q
    den = q * s - 1 / (q * s)
    if abs(den) <= params.pole_guard:
        raise PoleProximityError(what, x, abs(den), params.pole_guard)
    return den


def boltzmann(x: complex, params: QParams) -> BoltzmannWeights:
    """Weights b, c_+, c_- of the spectral R-matrix at argument x."""
    x = complex(x)
    den = _denominator(x, params, "boltzmann")
    s = cmath.exp(x / 2)
    q = params.q
    return BoltzmannWeights(
        b=(s - 1 / s) / den,
        c_plus=s * (q - 1 / q) / den,
        c_minus=(q - 1 / q) / (s * den),
    )


def boltzmann_mp(x: complex, params: QParams, dps: int = 50) -> BoltzmannWeights:
    """High-precision weights, oracle only."""
    with mpmath.workdps(dps):
        s = mpmath.exp(mpmath.mpc(x) / 2)
        q = mpmath.mpc(params.q)
        den = q * s - 1 / (q * s)
        return BoltzmannWeights(
            b=complex((s - 1 / s) / den),
            c_plus=complex(s * (q - 1 / q) / den),
            c_minus=complex((q - 1 / q) / (s * den)),
        )


def b_weight(y: complex, params: QParams) -> complex:
    """b(y) in the closed form q (1 - e^y) / (1 - q^2 e^y)."""
    q = params.q
    z = cmath.exp(y)
    den = 1 - q * q * z
    if abs(den) <= params.pole_guard:
        raise PoleProximityError("b", y, abs(den), params.pole_guard)
    return q * (1 - z) / den


def c_minus_over_b(y: complex, params: QParams) -> complex:
    """The ratio c_-(y)/b(y) = (q - q^-1)/(e^y - 1)."""
    z = cmath.exp(y)
    if abs(z - 1) <= params.pole_guard:
        raise PoleProximityError("c_-/b", y, abs(z - 1), params.pole_guard)
    q = params.q
    return (q - 1 / q) / (z - 1)


def antisymmetry_residual(x: complex, params: QParams) -> float:
    """|c_-/b(-x) + c_-/b(x) + (q - q^-1)|, zero for every admissible x."""
    q = params.q
    return abs(c_minus_over_b(-x, params) + c_minus_over_b(x, params) + (q - 1 / q))


def r_constant(params: QParams) -> LocalOperator:
    """Constant R-matrix on C^n (x) C^n."""
    n = params.n
    q = params.q
    entries = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            entries[i * n + j, i * n + j] = 1.0 if i == j else 1 / q
    for i in range(n):
        for j in range(i):
            entries[i * n + j, j * n + i] += 1 - q**-2
    return LocalOperator(n, 2, entries)


def _unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def r_constant_reference(params: QParams) -> LocalOperator:
    """The constant R-matrix assembled from Kronecker products of unit matrices."""
    n = params.n
    q = params.q
    total = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            weight = 1.0 if i == j else 1 / q
            total += weight * np.kron(_unit(n, i, i), _unit(n, j, j))
            if i > j:
                total += (1 - q**-2) * np.kron(_unit(n, i, j), _unit(n, j, i))
    return LocalOperator(n, 2, total)


def swap(n: int) -> LocalOperator:
    return LocalOperator.swap(n)


def r_inverse(params: QParams) -> np.ndarray:
    r = r_constant(params).entries
    cond = np.linalg.cond(r)
    if cond > CONDITION_WARNING:
        logger.warning(f"R-matrix is ill-conditioned (cond={cond:.3e}) for q={params.q}")
    else:
        logger.debug(f"R-matrix condition number {cond:.3e}")
    return np.linalg.inv(r)


def r_spectral(x: complex, params: QParams, r_inv: Optional[np.ndarray] = None) -> LocalOperator:
    """Spectral R-matrix as the rational combination of R and P R^-1 P."""
    x = complex(x)
    den = _denominator(x, params, "r_spectral")
    q = params.q
    s = cmath.exp(x / 2)
    r = r_constant(params).entries
    p = LocalOperator.swap(params.n).entries
    if r_inv is None:
        r_inv = r_inverse(params)
    entries = (q * s * r - (p @ r_inv @ p) / (q * s)) / den
    return LocalOperator(params.n, 2, entries)


def r_spectral_numerator(x: complex, params: QParams,
                         r_inv: Optional[np.ndarray] = None) -> LocalOperator:
    """
    (q s - (q s)^-1) R(x), regular at the pole x = -2 log q.

    Bethe terms whose psi factor is divided by the same denominator use it there.
    """
    q = params.q
    s = cmath.exp(complex(x) / 2)
    r = r_constant(params).entries
    p = LocalOperator.swap(params.n).entries
    if r_inv is None:
        r_inv = r_inverse(params)
    return LocalOperator(params.n, 2, q * s * r - (p @ r_inv @ p) / (q * s))


def r_spectral_weights(x: complex, params: QParams) -> LocalOperator:
    """n = 2 spectral R-matrix filled directly with the Boltzmann weights."""
    if params.n != 2:
        raise ValueError("the Boltzmann-weight fill exists for n = 2 only")
    w = boltzmann(x, params)
    entries = np.zeros((4, 4), dtype=np.complex128)
    entries[0, 0] = entries[3, 3] = 1.0
    entries[1, 1] = entries[2, 2] = w.b
    entries[2, 1] = w.c_plus
    entries[1, 2] = w.c_minus
    return LocalOperator(2, 2, entries)


def _relative(diff: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(diff)) / max(1.0, float(np.max(np.abs(scale)))))


def ybe_residual(x1: complex, x2: complex, x3: complex, params: QParams) -> float:
    """
    Max-abs entry of R12(x1-x2) R13(x1-x3) R23(x2-x3) - R23 R13 R12 on (C^n)^3.

    Normalised by the larger of 1 and the largest entry of the left side.
    """
    r_inv = r_inverse(params)
    r12 = r_spectral(x1 - x2, params, r_inv)
    r13 = r_spectral(x1 - x3, params, r_inv)
    r23 = r_spectral(x2 - x3, params, r_inv)
    shape = SpaceShape(params.n, 3)
    lhs = materialize([(r12, (1, 2)), (r13, (1, 3)), (r23, (2, 3))], shape)
    rhs = materialize([(r23, (2, 3)), (r13, (1, 3)), (r12, (1, 2))], shape)
    return _relative(lhs - rhs, lhs)
