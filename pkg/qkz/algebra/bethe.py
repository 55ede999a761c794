"""
U_q[sl(2)] Bethe ansatz vectors as lattice sums.

    f(x) = sum_{l in Z^m} B(x; u_m) ... B(x; u_1) Omega g(x; u),   u_j = u~_j + l_j kappa

with g the twisted weight of ``qfunctions.bethe_weight``. The sum runs over shells
max_j |l_j| = 0, 1, 2, ... in lexicographic order inside each shell and stops once
two consecutive shells change the partial sum by less than sum_tol relative to the
larger of its norm and the largest term.

Anchored bases u~_j = x_a + 2 log q put every l_j < 0 on a zero of psi, so only the
quadrant l >= 0 contributes. At l_j = 0 the zero of psi meets the pole of R(x_a - u_j);
that site is built with the numerator R-matrix and psi is divided by the same factor.
For a generic base the summand tends to a nonzero constant as l_j -> -inf and the
sum does not converge.
"""

from __future__ import annotations

import cmath
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConvergenceError, NullVectorError, PoleProximityError, ShapeError
from .monodromy import (
    MonodromySpec,
    doubled_monodromy,
    q_trace,
    reference_vector,
    shifted_inhomogeneities,
    shifted_monodromy,
)
from .qfunctions import TruncationPolicy, bethe_weight
from .rmatrix import QParams, b_weight
from .tensorspace import SpaceShape, StateVector

logger = logging.getLogger(__name__)

WINDOW_Q = (0.5, 0.95)
WINDOW_KAPPA = (1.0, 2.5)
NULL_RATIO = 1e-12
# |f| below this fraction of the largest term counts as a vanishing vector.
VANISHING_RATIO = 1e-6
# Distance in units of kappa below which two bases count as lattice-equivalent.
LATTICE_TOLERANCE = 1e-9
# Shells before the divergence guard starts counting increases.
DIVERGENCE_WARMUP = 2
DIVERGENCE_RUN = 3


def in_validated_window(params: QParams) -> bool:
    q, kappa = params.q, params.kappa
    return (
        q.imag == 0 and WINDOW_Q[0] <= q.real <= WINDOW_Q[1]
        and kappa.imag == 0 and WINDOW_KAPPA[0] <= kappa.real <= WINDOW_KAPPA[1]
    )


def on_kappa_lattice(y: complex, params: QParams) -> bool:
    ratio = complex(y) / params.kappa
    return abs(ratio - round(ratio.real)) < LATTICE_TOLERANCE


def anchor_parameter(x_a: complex, params: QParams) -> complex:
    """The base x_a + 2 log q whose lattice line starts on the zero of psi(x_a - u)."""
    return complex(x_a) + 2 * cmath.log(params.q)


@dataclass(frozen=True)
class BetheSpec:
    """Inhomogeneities, base parameters u~ and truncation policy of one Bethe vector."""

    x: Tuple[complex, ...]
    u_base: Tuple[complex, ...]
    params: QParams
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    allow_outside_window: bool = False

    def __post_init__(self):
        xs = tuple(complex(v) for v in self.x)
        us = tuple(complex(v) for v in self.u_base)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "u_base", us)
        if self.params.n != 2:
            raise ShapeError(f"sl(2) Bethe vectors need n=2, got n={self.params.n}")
        if not xs:
            raise ShapeError("a Bethe vector needs at least one site")
        self.params.require_convergent_shift()
        guard = self.params.pole_guard
        for j, k in itertools.combinations(range(len(xs)), 2):
            if abs(xs[j] - xs[k]) <= guard:
                raise PoleProximityError("inhomogeneities", xs[j] - xs[k], abs(xs[j] - xs[k]), guard)
        for j, k in itertools.combinations(range(len(us)), 2):
            if on_kappa_lattice(us[j] - us[k], self.params):
                raise ValueError(
                    f"base parameters {j + 1} and {k + 1} coincide modulo the kappa-lattice"
                )
        if len(us) > len(xs):
            logger.warning(
                f"m={len(us)} exceeds N={len(xs)}: the vector violates the weight condition"
            )
        if not self.allow_outside_window and not in_validated_window(self.params):
            raise ValueError(
                f"(q, kappa) = ({self.params.q}, {self.params.kappa}) lies outside the "
                f"validated window q in {WINDOW_Q}, kappa in {WINDOW_KAPPA}; "
                "set allow_outside_window to proceed"
            )

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.u_base)

    @property
    def shape(self) -> SpaceShape:
        return SpaceShape(2, self.N)

    @property
    def vanishing_expected(self) -> bool:
        """More particles than half the sites: no highest-weight vector, the sum is zero."""
        return 2 * self.m > self.N

    def shifted(self, i: int) -> "BetheSpec":
        """The same lattice with x_i replaced by x_i + kappa."""
        return replace(self, x=shifted_inhomogeneities(self.x, i, self.params.kappa))


@dataclass(frozen=True, eq=False)
class BetheResult:
    state: StateVector
    shells_used: int
    shell_deltas: Tuple[float, ...]
    converged: bool
    max_term_norm: float = 0.0
    terms_used: int = 0

    @property
    def is_null(self) -> bool:
        return self.state.norm() < NULL_RATIO * self.max_term_norm

    @property
    def relative_norm(self) -> float:
        """|f| over the largest term of its sum."""
        if self.max_term_norm == 0:
            return 0.0
        return self.state.norm() / self.max_term_norm

    @property
    def vanishes(self) -> bool:
        return self.relative_norm < VANISHING_RATIO


def anchored_spec(x: Sequence[complex], anchors: Sequence[int], params: QParams,
                  policy: Optional[TruncationPolicy] = None, **kwargs) -> BetheSpec:
    """A spec whose base parameters start on the zero lines of the listed 1-based sites."""
    xs = tuple(complex(v) for v in x)
    for a in anchors:
        if not 1 <= a <= len(xs):
            raise ShapeError(f"anchor site {a} outside 1..{len(xs)}")
    return BetheSpec(xs, tuple(anchor_parameter(xs[a - 1], params) for a in anchors), params,
                     policy or TruncationPolicy(), **kwargs)


def reference_state(shape: SpaceShape) -> StateVector:
    """Omega = |1> (x) ... (x) |1>."""
    return StateVector(shape, reference_vector(shape))


class BCache:
    """Dense B(x; u) blocks keyed by u and the regularised sites."""

    def __init__(self, x: Sequence[complex], params: QParams, gamma: int = 2):
        self.x = tuple(complex(v) for v in x)
        self.params = params
        self.gamma = gamma
        self._blocks: Dict[Tuple[float, float, Tuple[int, ...]], np.ndarray] = {}

    def __call__(self, u: complex, regularized: Tuple[int, ...] = ()) -> np.ndarray:
        key = (round(u.real, 12), round(u.imag, 12), tuple(regularized))
        block = self._blocks.get(key)
        if block is None:
            t = doubled_monodromy(MonodromySpec(self.x, u, self.params, tuple(regularized)))
            block = np.array(t.b(self.gamma))
            self._blocks[key] = block
        return block

    def __len__(self) -> int:
        return len(self._blocks)


def _b_string(u: Sequence[complex], regularized: Sequence[Tuple[int, ...]], cache: BCache,
              omega: np.ndarray) -> np.ndarray:
    vec = omega
    for uj, sites in zip(u, regularized):
        vec = cache(uj, sites) @ vec
    return vec


def bethe_term(x: Sequence[complex], u: Sequence[complex], params: QParams,
               policy: TruncationPolicy = TruncationPolicy(),
               cache: Optional[BCache] = None) -> StateVector:
    """One summand B(x; u_m) ... B(x; u_1) Omega g(x; u)."""
    x = tuple(complex(v) for v in x)
    u = [complex(v) for v in u]
    shape = SpaceShape(params.n, len(x))
    omega = reference_vector(shape)
    weight = bethe_weight(x, u, params, policy)
    if weight.vanishes:
        return StateVector.zeros(shape)
    cache = cache or BCache(x, params)
    return StateVector(shape, weight.value * _b_string(u, weight.regularized, cache, omega))


def shell_points(m: int, L: int) -> Iterator[Tuple[int, ...]]:
    """Lattice points with max |l_j| == L in lexicographic order."""
    for point in itertools.product(range(-L, L + 1), repeat=m):
        if max(abs(c) for c in point) == L:
            yield point


def _diverging(deltas: Sequence[float]) -> bool:
    tail = deltas[DIVERGENCE_WARMUP:]
    if len(tail) < DIVERGENCE_RUN + 1:
        return False
    run = tail[-(DIVERGENCE_RUN + 1):]
    return all(b > a for a, b in zip(run, run[1:]))


def lattice_sum(m: int, shape: SpaceShape, term: Callable[[Tuple[int, ...]], np.ndarray],
                policy: TruncationPolicy, executor=None, level: Optional[int] = None) -> BetheResult:
    """
    Sum term(l) over Z^m shell by shell.

    With an executor the terms of one shell are computed concurrently and added
    in lexicographic order.
    """
    dim = shape.dim
    total = np.zeros(dim, dtype=np.complex128)
    deltas: List[float] = []
    max_term = 0.0
    terms_used = 0
    converged = False
    shells = 0
    for L in range(policy.max_shell + 1):
        points = list(shell_points(m, L))
        if executor is not None:
            contributions = executor.map_ordered(term, points)
            for c in contributions:
                if isinstance(c, BaseException):
                    raise c
        else:
            contributions = [term(p) for p in points]
        shell_sum = np.zeros(dim, dtype=np.complex128)
        for c in contributions:
            max_term = max(max_term, float(np.linalg.norm(c)))
            shell_sum = shell_sum + c
        terms_used += len(points)
        total = total + shell_sum
        shells = L
        if L == 0:
            continue
        # sums that cancel to zero are measured against their largest term
        scale = max(float(np.linalg.norm(total)), max_term)
        delta = float(np.linalg.norm(shell_sum)) / scale if scale > 0 else 0.0
        deltas.append(delta)
        logger.debug(f"Shell {L}: {len(points)} terms, delta {delta:.3e}")
        if len(deltas) >= 2 and deltas[-1] < policy.sum_tol and deltas[-2] < policy.sum_tol:
            converged = True
            break
        if _diverging(deltas):
            raise ConvergenceError(
                f"lattice sum diverges: shell deltas grew {DIVERGENCE_RUN} times in a row",
                deltas,
                level,
            )
    if not converged:
        logger.warning(
            f"Lattice sum not converged after {shells} shells (last delta "
            f"{deltas[-1] if deltas else float('nan'):.3e})"
        )
    return BetheResult(StateVector(shape, total), shells, tuple(deltas), converged, max_term, terms_used)


def bethe_vector(spec: BetheSpec, executor=None) -> BetheResult:
    """Sum the lattice of B-strings shell by shell."""
    shape = spec.shape
    omega = reference_vector(shape)
    if spec.m == 0:
        return BetheResult(StateVector(shape, omega), 0, (), True, 1.0, 1)

    kappa = spec.params.kappa
    cache = BCache(spec.x, spec.params)

    def term(point: Tuple[int, ...]) -> np.ndarray:
        u = [base + l * kappa for base, l in zip(spec.u_base, point)]
        weight = bethe_weight(spec.x, u, spec.params, spec.policy)
        if weight.vanishes:
            return np.zeros(shape.dim, dtype=np.complex128)
        return weight.value * _b_string(u, weight.regularized, cache, omega)

    result = lattice_sum(spec.m, shape, term, spec.policy, executor)
    logger.debug(
        f"Bethe vector N={spec.N}, m={spec.m}: {result.shells_used} shells, {len(cache)} B blocks"
    )
    return result


@dataclass(frozen=True)
class DifferenceReport:
    """Q(x; i) f(x) compared against the independently built f(x')."""

    site: int
    residual: float
    mass_residual: float
    shells: Tuple[int, int]
    converged: bool
    vanishing: bool = False


def compare_shift(qf: np.ndarray, target: np.ndarray, site: int, shells: Tuple[int, int],
                  converged: bool, mass: float, vanishing: bool = False) -> DifferenceReport:
    """|Q f - f'| relative to |f'| and to the largest lattice term `mass`."""
    diff = float(np.linalg.norm(qf - target))
    norm_t = float(np.linalg.norm(target))
    return DifferenceReport(
        site=site,
        residual=diff / norm_t if norm_t > 0 else float("inf"),
        mass_residual=diff / mass if mass > 0 else diff,
        shells=shells,
        converged=converged,
        vanishing=vanishing,
    )


def difference_report(spec: BetheSpec, i: int, executor=None,
                      allow_vanishing: bool = False) -> DifferenceReport:
    """
    Build f(x) and f(x') and compare Q(x; i) f(x) with f(x').

    A vanishing vector raises NullVectorError unless `allow_vanishing` is set; its
    residual is then only meaningful as `mass_residual`.
    """
    if not 1 <= i <= spec.N:
        raise ShapeError(f"site {i} outside 1..{spec.N}")
    f = bethe_vector(spec, executor)
    fp = bethe_vector(spec.shifted(i), executor)
    vanishing = f.vanishes or fp.vanishes
    if vanishing and not allow_vanishing:
        raise NullVectorError(
            f"Bethe vector vanishes (|f|/max term={f.relative_norm:.3e}, "
            f"|f'|/max term={fp.relative_norm:.3e})"
        )
    qf = q_trace(shifted_monodromy(spec.x, i, spec.params)) @ f.state.amplitudes
    return compare_shift(qf, fp.state.amplitudes, i, (f.shells_used, fp.shells_used),
                         f.converged and fp.converged,
                         max(f.max_term_norm, fp.max_term_norm), vanishing)


def difference_residual(spec: BetheSpec, i: int, executor=None) -> float:
    """|Q(x; i) f(x) - f(x')| / |f(x')|."""
    return difference_report(spec, i, executor).residual


# ---------------------------------------------------------------------------
# Unwanted-term telescoping
# ---------------------------------------------------------------------------


@dataclass
class UnwantedReport:
    """
    Unwanted coefficients of the top parameter along its lattice line.

    left(l) comes from A^Q and right(l) from D^Q, both multiplying
    B^Q(x; i) B(u_{m-1}) ... B(u_1) Omega.
    """

    site: int
    levels: List[int]
    left: List[complex]
    right: List[complex]
    ratios: List[Tuple[int, complex]]
    partial_sums: List[complex]
    boundary: complex
    max_term: float

    @property
    def worst_ratio_error(self) -> float:
        return max((abs(r + 1) for _, r in self.ratios), default=0.0)

    @property
    def relative_partial_sum(self) -> float:
        if not self.partial_sums or self.max_term == 0:
            return 0.0
        return abs(self.partial_sums[-1]) / self.max_term

    @property
    def relative_boundary(self) -> float:
        return abs(self.boundary) / self.max_term if self.max_term else 0.0


def _q_over_b(y: complex, params: QParams) -> complex:
    """q / b(y) without the pole of b at y = -2 log q."""
    z = cmath.exp(y)
    return (1 - params.q**2 * z) / (1 - z)


def _inv_q_b(y: complex, params: QParams) -> complex:
    """1 / (q b(y)) without the pole of b at y = -2 log q."""
    q2 = params.q**2
    z = cmath.exp(y)
    return (1 - q2 * z) / (q2 * (1 - z))


def _unwanted_pair(spec: BetheSpec, i: int, l: int) -> Tuple[complex, complex]:
    params = spec.params
    q = params.q
    kappa = params.kappa
    u = list(spec.u_base)
    u[-1] = u[-1] + l * kappa
    um = u[-1]
    weight = bethe_weight(spec.x, u, params, spec.policy)
    if weight.vanishes:
        return 0j, 0j
    xi = spec.x[i - 1]
    after = 1.0 + 0j
    before = 1.0 + 0j
    for uk in u[:-1]:
        after *= _q_over_b(um - uk, params)
        before *= _inv_q_b(uk - um, params)
    # at anchor sites the weight carries psi / (q s - (q s)^-1), which vanishes times P
    anchor_sites = weight.regularized[-1]
    vacuum = q ** spec.N + 0j
    for j, xj in enumerate(spec.x, start=1):
        y = xj - um
        if j in anchor_sites:
            s = cmath.exp(y / 2)
            vacuum *= s - 1 / s
        else:
            vacuum *= b_weight(y, params)
    z = cmath.exp(xi + kappa - um)
    p_factor = -(1 - q**2) * z / (1 - z)
    s_factor = (1 - q**2) / (cmath.exp(um - xi) - 1)
    left = 0j if anchor_sites else weight.value * p_factor * after
    right = weight.value * s_factor * vacuum * before
    return left, right


def unwanted_telescoping(spec: BetheSpec, i: int, shell_cap: int = 25) -> Optional[UnwantedReport]:
    """
    Evaluate the unwanted coefficients of u_m for l_m in [-L, L], lower parameters at l = 0.

    Neighbouring levels cancel, left(l + 1) = -right(l), so the partial sums are the
    boundary terms left(-L) + right(L). For anchored bases left(-L) is zero and right(L)
    decays; for a generic base left(-L) tends to a nonzero constant. Returns None for m = 0.
    """
    if spec.m == 0:
        return None
    if not 1 <= i <= spec.N:
        raise ShapeError(f"site {i} outside 1..{spec.N}")

    levels = list(range(-shell_cap, shell_cap + 1))
    pairs = {l: _unwanted_pair(spec, i, l) for l in levels}

    ratios: List[Tuple[int, complex]] = []
    for l in levels[:-1]:
        nxt = pairs[l + 1][0]
        if abs(pairs[l][1]) > 0 and abs(nxt) > 0:
            ratios.append((l, nxt / pairs[l][1]))

    max_term = max(abs(v) for pair in pairs.values() for v in pair)
    partial: List[complex] = []
    for L in range(1, shell_cap + 1):
        partial.append(sum(sum(pairs[l]) for l in range(-L, L + 1)))
    boundary = pairs[-shell_cap][0] + pairs[shell_cap][1]
    logger.debug(
        f"Unwanted telescoping site {i}: {len(ratios)} interior ratios, "
        f"final partial sum {abs(partial[-1]) if partial else 0:.3e}"
    )
    return UnwantedReport(
        site=i,
        levels=levels,
        left=[pairs[l][0] for l in levels],
        right=[pairs[l][1] for l in levels],
        ratios=ratios,
        partial_sums=partial,
        boundary=boundary,
        max_term=max_term,
    )
