"""
q-Pochhammer products and the scalar solutions psi, tau.

    (z; p)_inf = prod_{k >= 0} (1 - z p^k),   p = e^-kappa
    psi(y) = (q^2 e^y; p)_inf / (e^y; p)_inf
    tau(y) = (1 - e^y) (q^-2 e^(y - kappa); p)_inf / (q^2 e^y; p)_inf

They solve q^-1 b(y + kappa) psi(y + kappa) = psi(y) and
q^2 tau(y) / b(y) = tau(y - kappa) / b(kappa - y).
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import mpmath

from ..errors import DivergentProductError, PoleProximityError
from .rmatrix import QParams, b_weight

logger = logging.getLogger(__name__)

# Distance in units of kappa below which an argument counts as on a zero line of psi.
ZERO_LINE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TruncationPolicy:
    """Truncation knobs for infinite products and lattice sums."""

    product_tol: float = 1e-16
    max_factors: int = 10**5
    sum_tol: float = 1e-10
    max_shell: int = 40

    def __post_init__(self):
        if self.product_tol <= 0:
            raise ValueError("product_tol must be positive")
        if self.max_factors < 1:
            raise ValueError("max_factors must be >= 1")
        if self.sum_tol <= 0:
            raise ValueError("sum_tol must be positive")
        if self.max_shell < 1:
            raise ValueError("max_shell must be >= 1")


@dataclass(frozen=True)
class Product:
    """A truncated infinite product with its tail bound."""

    value: complex
    tail_bound: float
    factors: int
    min_factor: float

    def __complex__(self) -> complex:
        return self.value


def qpochhammer(z: complex, p: complex, policy: TruncationPolicy = TruncationPolicy()) -> Product:
    """
    (z; p)_inf truncated at the first k with |z p^k| < product_tol.

    The relative error is bounded by sum_{j >= k} |z p^j| = |z p^k| / (1 - |p|).
    """
    z = complex(z)
    p = complex(p)
    if abs(p) >= 1:
        raise DivergentProductError(f"(z; p)_inf diverges for |p| = {abs(p):.6g} >= 1")
    value = 1.0 + 0j
    term = z
    min_factor = float("inf")
    k = 0
    while abs(term) >= policy.product_tol and k < policy.max_factors:
        factor = 1 - term
        min_factor = min(min_factor, abs(factor))
        value *= factor
        term *= p
        k += 1
    if k == policy.max_factors:
        logger.warning(f"q-Pochhammer product stopped at max_factors={k}")
    tail = abs(term) / (1 - abs(p))
    return Product(value, tail, k, min_factor)


def qpochhammer_mp(z: complex, p: complex, dps: int = 50) -> complex:
    """Reference (z; p)_inf at `dps` digits from mpmath.qp."""
    with mpmath.workdps(dps):
        z_mp = mpmath.mpc(z)
        p_mp = mpmath.mpc(p)
        if abs(p_mp) >= 1:
            raise DivergentProductError("(z; p)_inf diverges for |p| >= 1")
        return complex(mpmath.qp(z_mp, p_mp))


def _ratio_product(num_z: complex, den_z: complex, p: complex, policy: TruncationPolicy,
                   what: str, y: complex, params: QParams) -> complex:
    """(num_z; p)_inf / (den_z; p)_inf multiplied factor by factor, so large |z| cannot overflow."""
    if abs(p) >= 1:
        raise DivergentProductError(f"(z; p)_inf diverges for |p| = {abs(p):.6g} >= 1")
    value = 1.0 + 0j
    a, b = num_z, den_z
    k = 0
    while (abs(a) >= policy.product_tol or abs(b) >= policy.product_tol) and k < policy.max_factors:
        den = 1 - b
        if abs(den) <= params.pole_guard:
            raise PoleProximityError(what, y, abs(den), params.pole_guard)
        value *= (1 - a) / den
        a *= p
        b *= p
        k += 1
    return value


def psi(y: complex, params: QParams, policy: TruncationPolicy = TruncationPolicy()) -> complex:
    params.require_convergent_shift()
    y = complex(y)
    z = cmath.exp(y)
    return _ratio_product(params.q**2 * z, z, params.p, policy, "psi", y, params)


def tau(y: complex, params: QParams, policy: TruncationPolicy = TruncationPolicy()) -> complex:
    params.require_convergent_shift()
    y = complex(y)
    q = params.q
    z = cmath.exp(y)
    ratio = _ratio_product(z * params.p / q**2, q**2 * z, params.p, policy, "tau", y, params)
    return (1 - z) * ratio


def psi_mp(y: complex, params: QParams, dps: int = 50) -> complex:
    with mpmath.workdps(dps):
        z = mpmath.exp(mpmath.mpc(y))
        p = mpmath.exp(-mpmath.mpc(params.kappa))
        q2 = mpmath.mpc(params.q) ** 2
        return complex(
            mpmath.mpc(qpochhammer_mp(complex(q2 * z), complex(p), dps))
            / mpmath.mpc(qpochhammer_mp(complex(z), complex(p), dps))
        )


def tau_mp(y: complex, params: QParams, dps: int = 50) -> complex:
    with mpmath.workdps(dps):
        z = mpmath.exp(mpmath.mpc(y))
        p = mpmath.exp(-mpmath.mpc(params.kappa))
        q2 = mpmath.mpc(params.q) ** 2
        num = qpochhammer_mp(complex(z * p / q2), complex(p), dps)
        den = qpochhammer_mp(complex(q2 * z), complex(p), dps)
        return complex((1 - z) * mpmath.mpc(num) / mpmath.mpc(den))


def zero_line_index(y: complex, params: QParams) -> Optional[int]:
    """
    k when y = k kappa - 2 log q, None otherwise.

    psi vanishes on these points for k >= 1; at k = 0 its zero meets the pole of
    R(y) and the product is taken through psi_regularized.
    """
    ratio = (complex(y) + 2 * cmath.log(params.q)) / params.kappa
    k = int(round(ratio.real))
    if abs(ratio - k) < ZERO_LINE_TOLERANCE:
        return k
    return None


def psi_regularized(y: complex, params: QParams,
                    policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """
    psi(y) / (q s - (q s)^-1) with s = e^(y/2), finite at y = -2 log q.

    Equal to -q s / (1 - e^y) prod_{k >= 1} (1 - q^2 e^y p^k) / (1 - e^y p^k).
    """
    params.require_convergent_shift()
    y = complex(y)
    z = cmath.exp(y)
    if abs(1 - z) <= params.pole_guard:
        raise PoleProximityError("psi_regularized", y, abs(1 - z), params.pole_guard)
    p = params.p
    tail = _ratio_product(params.q**2 * z * p, z * p, p, policy, "psi_regularized", y, params)
    return -params.q * cmath.exp(y / 2) / (1 - z) * tail


def q_power(exponent: complex, params: QParams) -> complex:
    """q^exponent on the principal branch of log q."""
    return cmath.exp(exponent * cmath.log(params.q))


def tau_twisted(y: complex, params: QParams,
                policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """tau(y) q^(2 y / kappa), the pair factor of the Bethe weight."""
    return tau(y, params, policy) * q_power(2 * complex(y) / params.kappa, params)


def root_twist(N: int, M: int, u: complex, params: QParams) -> complex:
    """q^(2 (N - M + 1) u / kappa) for one of M roots on N sites."""
    return q_power(2 * (N - M + 1) * complex(u) / params.kappa, params)


def scalar_solutions(y: complex, params: QParams,
                     policy: TruncationPolicy = TruncationPolicy()) -> Tuple[complex, complex]:
    return psi(y, params, policy), tau(y, params, policy)


def scalar_equation_residuals(y: complex, params: QParams,
                              policy: TruncationPolicy = TruncationPolicy()) -> Tuple[float, float]:
    """Relative residuals of the psi and tau difference equations at y."""
    y = complex(y)
    q = params.q
    kappa = params.kappa
    psi_y = psi(y, params, policy)
    psi_res = abs(b_weight(y + kappa, params) * psi(y + kappa, params, policy) / q - psi_y)
    psi_res /= abs(psi_y)
    lhs = q**2 * tau(y, params, policy) / b_weight(y, params)
    rhs = tau(y - kappa, params, policy) / b_weight(kappa - y, params)
    tau_res = abs(lhs - rhs) / abs(lhs)
    return float(psi_res), float(tau_res)


def _require_distinct(u: Sequence[complex], params: QParams, what: str) -> None:
    for k in range(len(u)):
        for l in range(k + 1, len(u)):
            if abs(u[k] - u[l]) <= params.pole_guard:
                raise PoleProximityError(what, u[k] - u[l], abs(u[k] - u[l]), params.pole_guard)


def g_scalar(x: Sequence[complex], u: Sequence[complex], params: QParams,
             policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """prod_{i,j} psi(x_i - u_j) prod_{k<l} tau(u_k - u_l)."""
    u = [complex(v) for v in u]
    _require_distinct(u, params, "g_scalar")
    g = 1.0 + 0j
    for uj in u:
        for xi in x:
            g *= psi(complex(xi) - uj, params, policy)
            if g == 0:
                return 0j
    for k in range(len(u)):
        for l in range(k + 1, len(u)):
            g *= tau(u[k] - u[l], params, policy)
    return g


@dataclass(frozen=True)
class BetheWeight:
    """Scalar coefficient of one Bethe term and the sites regularised for each root."""

    value: complex
    regularized: Tuple[Tuple[int, ...], ...]

    @property
    def vanishes(self) -> bool:
        return self.value == 0


def bethe_weight(x: Sequence[complex], u: Sequence[complex], params: QParams,
                 policy: TruncationPolicy = TruncationPolicy()) -> BetheWeight:
    """
    Coefficient of B(u_1) ... B(u_M) Omega in a solution on sites x.

        prod_{j,k} psi(x_j - u_k) prod_k q^(2 (N - M + 1) u_k / kappa)
            prod_{k<l} tau(u_k - u_l) q^(2 (u_k - u_l) / kappa)

    A root sitting at x_j + 2 log q has psi(x_j - u_k) replaced by psi_regularized
    and site j recorded, so the caller builds B(u_k) with the numerator R-matrix there.
    Roots on a zero line of psi with k >= 1 give a vanishing weight.
    """
    x = [complex(v) for v in x]
    u = [complex(v) for v in u]
    _require_distinct(u, params, "bethe_weight")
    N, M = len(x), len(u)
    g = 1.0 + 0j
    regularized: List[Tuple[int, ...]] = []
    for uk in u:
        sites = []
        for j, xj in enumerate(x, start=1):
            y = xj - uk
            k = zero_line_index(y, params)
            if k is not None and k >= 1:
                return BetheWeight(0j, ())
            if k == 0:
                g *= psi_regularized(y, params, policy)
                sites.append(j)
            else:
                g *= psi(y, params, policy)
        g *= root_twist(N, M, uk, params)
        regularized.append(tuple(sites))
    for k in range(M):
        for l in range(k + 1, M):
            g *= tau_twisted(u[k] - u[l], params, policy)
    return BetheWeight(g, tuple(regularized))
