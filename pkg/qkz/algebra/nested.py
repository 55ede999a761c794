"""
Nested Bethe vectors for U_q[sl(n)].

The top level is a lattice sum of strings B_beta_M(x; u_M) ... B_beta_1(x; u_1) Omega
whose coefficients are the components of a rank n-1 Bethe vector built on the
inhomogeneities u. The recursion stops at rank 1, where the inner vector is the
scalar 1 and the construction reduces to the sl(2) one.

Every level carries the twisted weight of ``qfunctions.bethe_weight`` with N the
number of sites of that level. Inner roots are anchored on outer roots: the base of
an inner root anchored on outer root b is u_b + 2 log q, recomputed for every outer
term, so each inner sum again runs over a single quadrant.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..errors import GradingError, NullVectorError, PoleProximityError, ShapeError
from .bethe import (
    BetheResult,
    DifferenceReport,
    anchor_parameter,
    compare_shift,
    in_validated_window,
    lattice_sum,
    on_kappa_lattice,
)
from .monodromy import (
    MonodromySpec,
    doubled_monodromy,
    q_trace,
    reference_vector,
    shifted_inhomogeneities,
    shifted_monodromy,
)
from .qfunctions import TruncationPolicy, bethe_weight
from .rmatrix import QParams
from .symmetry import Weight, color_weight_of, generators, raising_residual
from .tensorspace import SpaceShape, StateVector

logger = logging.getLogger(__name__)

MAX_RANK = 4
MAX_TOP_DIMENSION = 2**18


def level_weight(level_sizes: Sequence[int]) -> Tuple[int, ...]:
    """(N_n - N_{n-1}, ..., N_2 - N_1, N_1) for level sizes (N_n, ..., N_1)."""
    sizes = list(level_sizes)
    return tuple(a - b for a, b in zip(sizes, sizes[1:])) + (sizes[-1],)


@dataclass(frozen=True)
class NestedSpec:
    """
    Rank, level sizes, top inhomogeneities, top base parameters and inner anchors.

    ``inner_anchors[k]`` lists, for each root of level k + 2, the 1-based index of the
    level k + 1 root it is anchored on.
    """

    n: int
    level_sizes: Tuple[int, ...]
    x: Tuple[complex, ...]
    u_base: Tuple[complex, ...]
    inner_anchors: Tuple[Tuple[int, ...], ...]
    params: QParams
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    # One policy per summed level, top first; defaults to `policy` everywhere.
    level_policies: Optional[Tuple[TruncationPolicy, ...]] = None
    allow_outside_window: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.level_sizes)
        xs = tuple(complex(v) for v in self.x)
        us = tuple(complex(v) for v in self.u_base)
        inner = tuple(tuple(int(a) for a in level) for level in self.inner_anchors)
        object.__setattr__(self, "level_sizes", sizes)
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "u_base", us)
        object.__setattr__(self, "inner_anchors", inner)

        if not 2 <= self.n <= MAX_RANK:
            raise ShapeError(f"rank n must lie in 2..{MAX_RANK}, got {self.n}")
        if self.params.n != self.n:
            raise ShapeError(f"params carry n={self.params.n}, spec has n={self.n}")
        if len(sizes) != self.n:
            raise ShapeError(f"need {self.n} level sizes, got {len(sizes)}")
        if any(s < 0 for s in sizes):
            raise ValueError(f"level sizes must be non-negative, got {sizes}")
        if any(a < b for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"level sizes must be non-increasing, got {sizes}")
        if not Weight(level_weight(sizes)).is_dominant():
            raise ValueError(
                f"level sizes {sizes} give weight {level_weight(sizes)}, which is not dominant"
            )
        if len(xs) != sizes[0] or not xs:
            raise ShapeError(f"need {sizes[0]} top inhomogeneities, got {len(xs)}")
        if self.n ** len(xs) > MAX_TOP_DIMENSION:
            raise ShapeError(f"top dimension {self.n}^{len(xs)} exceeds {MAX_TOP_DIMENSION}")
        if len(us) != sizes[1]:
            raise ShapeError(f"need {sizes[1]} top base parameters, got {len(us)}")
        for a, b in itertools.combinations(range(len(us)), 2):
            if on_kappa_lattice(us[a] - us[b], self.params):
                raise ValueError(f"base parameters {a + 1} and {b + 1} coincide modulo kappa")
        if len(inner) != self.n - 2:
            raise ShapeError(f"need {self.n - 2} inner anchor lists, got {len(inner)}")
        for k, level in enumerate(inner):
            outer, size = sizes[k + 1], sizes[k + 2]
            if len(level) != size:
                raise ShapeError(f"level {k + 2} needs {size} anchors, got {len(level)}")
            if any(not 1 <= a <= outer for a in level):
                raise ShapeError(f"level {k + 2} anchors {level} outside 1..{outer}")
            if len(set(level)) != len(level):
                raise ValueError(f"level {k + 2} anchors {level} repeat a root")
        guard = self.params.pole_guard
        for a, b in itertools.combinations(range(len(xs)), 2):
            if abs(xs[a] - xs[b]) <= guard:
                raise PoleProximityError("inhomogeneities", xs[a] - xs[b], abs(xs[a] - xs[b]), guard)
        if self.level_policies is not None and len(self.level_policies) != self.n - 1:
            raise ShapeError(f"need {self.n - 1} level policies, got {len(self.level_policies)}")
        self.params.require_convergent_shift()
        if not self.allow_outside_window and not in_validated_window(self.params):
            raise ValueError(
                f"(q, kappa) = ({self.params.q}, {self.params.kappa}) lies outside the "
                "validated window; set allow_outside_window to proceed"
            )

    @property
    def shape(self) -> SpaceShape:
        return SpaceShape(self.n, len(self.x))

    @property
    def weight(self) -> Weight:
        return Weight(level_weight(self.level_sizes))

    @property
    def policies(self) -> Tuple[TruncationPolicy, ...]:
        return self.level_policies or (self.policy,) * (self.n - 1)

    def shifted(self, i: int) -> "NestedSpec":
        return replace(self, x=shifted_inhomogeneities(self.x, i, self.params.kappa))


class RowCache:
    """First-row blocks B_beta(x; u), beta = 2..n, keyed by u and the regularised sites."""

    def __init__(self, x: Sequence[complex], params: QParams):
        self.x = tuple(complex(v) for v in x)
        self.params = params
        self._rows: Dict[Tuple[float, float, Tuple[int, ...]], np.ndarray] = {}

    def __call__(self, u: complex, beta: int, regularized: Tuple[int, ...] = ()) -> np.ndarray:
        key = (round(u.real, 12), round(u.imag, 12), tuple(regularized))
        row = self._rows.get(key)
        if row is None:
            t = doubled_monodromy(MonodromySpec(self.x, u, self.params, tuple(regularized)))
            row = np.array(t.blocks[0])
            self._rows[key] = row
        return row[beta - 1]

    def __len__(self) -> int:
        return len(self._rows)


def _level_vector(n: int, sizes: Sequence[int], x: Sequence[complex],
                  u_base: Sequence[complex], inner_anchors: Sequence[Sequence[int]],
                  params: QParams, policies: Sequence[TruncationPolicy],
                  executor=None) -> BetheResult:
    shape = SpaceShape(n, len(x))
    omega = reference_vector(shape)
    M = sizes[1]
    if M == 0:
        return BetheResult(StateVector(shape, omega), 0, (), True, 1.0, 1)

    policy = policies[0]
    kappa = params.kappa
    cache = RowCache(x, params)
    inner_params = params.with_n(n - 1) if n > 2 else None
    # itertools.product order matches the basis rank of the inner space.
    strings = list(itertools.product(range(2, n + 1), repeat=M))

    def term(point: Tuple[int, ...]) -> np.ndarray:
        u = [base + l * kappa for base, l in zip(u_base, point)]
        weight = bethe_weight(x, u, params, policy)
        if weight.vanishes:
            return np.zeros(shape.dim, dtype=np.complex128)
        if inner_params is None:
            components = np.ones(1, dtype=np.complex128)
        else:
            inner_base = [anchor_parameter(u[b - 1], params) for b in inner_anchors[0]]
            inner = _level_vector(n - 1, sizes[1:], u, inner_base, inner_anchors[1:],
                                  inner_params, policies[1:])
            components = inner.state.amplitudes
        acc = np.zeros(shape.dim, dtype=np.complex128)
        for betas, comp in zip(strings, components):
            if comp == 0:
                continue
            vec = omega
            for uj, beta, sites in zip(u, betas, weight.regularized):
                vec = cache(uj, beta, sites) @ vec
            acc = acc + comp * vec
        return weight.value * acc

    result = lattice_sum(M, shape, term, policy, executor, level=n)
    logger.debug(
        f"Nested level n={n}: {result.shells_used} shells, {result.terms_used} terms, "
        f"{len(cache)} B rows"
    )
    return result


def nested_bethe_vector(spec: NestedSpec, executor=None) -> BetheResult:
    """Build the rank-n vector; only the top lattice sum uses the executor."""
    return _level_vector(spec.n, spec.level_sizes, spec.x, spec.u_base, spec.inner_anchors,
                         spec.params, spec.policies, executor)


def nested_difference_report(spec: NestedSpec, i: int, executor=None,
                             allow_vanishing: bool = False) -> DifferenceReport:
    if not 1 <= i <= len(spec.x):
        raise ShapeError(f"site {i} outside 1..{len(spec.x)}")
    f = nested_bethe_vector(spec, executor)
    fp = nested_bethe_vector(spec.shifted(i), executor)
    vanishing = f.vanishes or fp.vanishes
    if vanishing and not allow_vanishing:
        raise NullVectorError(
            f"nested vector vanishes (|f|/max term={f.relative_norm:.3e}, "
            f"|f'|/max term={fp.relative_norm:.3e})"
        )
    qf = q_trace(shifted_monodromy(spec.x, i, spec.params)) @ f.state.amplitudes
    return compare_shift(qf, fp.state.amplitudes, i, (f.shells_used, fp.shells_used),
                         f.converged and fp.converged,
                         max(f.max_term_norm, fp.max_term_norm), vanishing)


def nested_difference_residual(spec: NestedSpec, i: int, executor=None) -> float:
    """|Q(x; i) f(x) - f(x')| / |f(x')| for the nested vector."""
    return nested_difference_report(spec, i, executor).residual


def nested_weight_of(f: StateVector, spec: NestedSpec) -> Weight:
    """Measured weight of f, which must equal the weight fixed by the level sizes."""
    measured = color_weight_of(f, spec.params.q)
    if measured != spec.weight:
        raise GradingError(
            f"measured weight {measured.omega} differs from {spec.weight.omega}",
            [measured.omega],
        )
    return measured


def nested_highest_weight_residual(f: StateVector, spec: NestedSpec) -> float:
    """Largest strictly lower limit block of T_0(x; +inf) applied to f, relative to |f|."""
    return raising_residual(f, generators(spec.x, spec.params))


def anchored_nested_spec(x: Sequence[complex], level_sizes: Sequence[int],
                         anchors: Sequence[int], inner_anchors: Sequence[Sequence[int]],
                         params: QParams, policy: Optional[TruncationPolicy] = None,
                         **kwargs) -> NestedSpec:
    """A spec whose top roots start on the zero lines of the listed 1-based sites."""
    xs = tuple(complex(v) for v in x)
    for a in anchors:
        if not 1 <= a <= len(xs):
            raise ShapeError(f"anchor site {a} outside 1..{len(xs)}")
    top = tuple(anchor_parameter(xs[a - 1], params) for a in anchors)
    return NestedSpec(len(level_sizes), tuple(level_sizes), xs, top,
                      tuple(tuple(level) for level in inner_anchors), params,
                      policy or TruncationPolicy(), **kwargs)
