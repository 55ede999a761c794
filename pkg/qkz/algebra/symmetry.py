"""
Quantum-group generators from the u -> +-inf limits of T_0(x; u).

At u -> +inf every spectral factor tends to P R^-1 P, so T_0 becomes lower
triangular in the auxiliary space with diagonal blocks q^(N - W_alpha); the block
(2, 1) is (1 - q^2) J_+. At u -> -inf the factors tend to R and the block (1, 2)
is (1 - q^-2) J_-. Both are normalised so that a single site gives E_12 resp. E_21.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GradingError, LimitNotConvergedError, NullVectorError, ShapeError
from .monodromy import MonodromySpec, doubled_monodromy, monodromy_T
from .rmatrix import QParams
from .tensorspace import SpaceShape, StateVector, basis_unrank, color_counts

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 120.0
STABILIZATION_STEP = 20.0
STABILIZATION_TOL = 1e-9
EIGEN_TOL = 1e-8
INTEGRALITY_TOL = 1e-6


@dataclass(frozen=True)
class Weight:
    omega: Tuple[int, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.omega):
            raise ValueError(f"weights must be non-negative, got {self.omega}")

    @property
    def total(self) -> int:
        return sum(self.omega)

    def is_dominant(self) -> bool:
        """omega_1 >= omega_2 >= ... >= omega_n."""
        return all(a >= b for a, b in zip(self.omega, self.omega[1:]))


@dataclass(frozen=True, eq=False)
class Generators:
    """Raising and lowering generators with the diagonal q^W_alpha, as dense maps on V."""

    shape: SpaceShape
    q: complex
    J_plus: np.ndarray = field(repr=False)
    J_minus: np.ndarray = field(repr=False)
    qW: Tuple[np.ndarray, ...] = field(repr=False)
    source: str
    # Strictly lower blocks (alpha, beta) of T_0(x; +U); numeric limits only.
    raising: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for k, d in enumerate(self.qW, start=1):
            off = d - np.diag(np.diag(d))
            if np.max(np.abs(off)) > 1e-9 * max(1.0, float(np.max(np.abs(d)))):
                raise ValueError(f"q^W_{k} is not diagonal")
            if np.min(np.abs(np.diag(d))) == 0:
                raise ValueError(f"q^W_{k} has a zero diagonal entry")


def color_operator(shape: SpaceShape, alpha: int, q: complex) -> np.ndarray:
    """Diagonal q^W_alpha: q to the number of sites of color alpha."""
    counts = color_counts(shape)[:, alpha - 1]
    return np.diag(np.power(complex(q), counts))


def _site_operators(shape: SpaceShape, q: complex, raising: bool) -> np.ndarray:
    """Sum over k of a site-k unit flip dressed by q-powers of the colors on either side."""
    N = shape.N
    dim = shape.dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    src_color, dst_color = (2, 1) if raising else (1, 2)
    for col in range(dim):
        digits = basis_unrank(col, shape)
        for k in range(N):
            if digits[k] != src_color:
                continue
            if raising:
                left = sum(1 for d in digits[:k] if d == 1)
                right = sum(1 for d in digits[k + 1:] if d == 2)
                weight = complex(q) ** (left + right)
            else:
                left = sum(1 for d in digits[:k] if d == 2)
                right = sum(1 for d in digits[k + 1:] if d == 1)
                weight = complex(q) ** -(left + right)
            target = list(digits)
            target[k] = dst_color
            row = 0
            for d in target:
                row = row * shape.n + (d - 1)
            out[row, col] += weight
    return out


def _closed_form(x: Sequence[complex], params: QParams) -> Generators:
    if params.n != 2:
        raise ShapeError("closed-form generators exist for n = 2 only")
    shape = SpaceShape(2, len(x))
    q = params.q
    return Generators(
        shape=shape,
        q=q,
        J_plus=_site_operators(shape, q, raising=True),
        J_minus=_site_operators(shape, q, raising=False),
        qW=tuple(color_operator(shape, a, q) for a in (1, 2)),
        source="closed_form",
    )


def _limit_parts(x: Sequence[complex], params: QParams, U: float):
    shape = SpaceShape(params.n, len(x))
    q = params.q
    upper = monodromy_T(MonodromySpec(x, U, params))
    lower = monodromy_T(MonodromySpec(x, -U, params))
    qw = tuple(
        q**shape.N * np.diag(1 / np.diag(upper.block(a, a))) for a in range(1, shape.n + 1)
    )
    j_plus = upper.block(2, 1) / (1 - q**2)
    j_minus = lower.block(1, 2) / (1 - q**-2)
    raising = {
        (a, b): upper.block(a, b) / (1 - q**2)
        for a in range(2, shape.n + 1)
        for b in range(1, a)
    }
    return shape, j_plus, j_minus, qw, raising


def _numeric_limit(x: Sequence[complex], params: QParams, U: float) -> Generators:
    shape, j_plus, j_minus, qw, raising = _limit_parts(x, params, U)
    _, j_plus2, j_minus2, qw2, _ = _limit_parts(x, params, U + STABILIZATION_STEP)
    drift = max(
        float(np.max(np.abs(j_plus - j_plus2))),
        float(np.max(np.abs(j_minus - j_minus2))),
        max(float(np.max(np.abs(a - b))) for a, b in zip(qw, qw2)),
    )
    if drift > STABILIZATION_TOL:
        raise LimitNotConvergedError(
            f"generators at U={U} and U={U + STABILIZATION_STEP} differ by {drift:.3e}"
        )
    logger.debug(f"Generator limits stable to {drift:.3e} at U={U}")
    return Generators(shape, params.q, j_plus, j_minus, qw, f"numeric_limit({U:g})", raising)


def generators(x: Sequence[complex], params: QParams, mode: str = "numeric_limit",
               U: float = DEFAULT_LIMIT) -> Generators:
    """J_+, J_- and q^W_alpha either from the monodromy limits or site by site."""
    x = tuple(complex(v) for v in x)
    if mode == "closed_form":
        return _closed_form(x, params)
    if mode == "numeric_limit":
        return _numeric_limit(x, params, U)
    raise ValueError(f"unknown generator mode {mode!r}")


def mode_agreement(x: Sequence[complex], params: QParams, U: float = DEFAULT_LIMIT) -> float:
    """Largest entrywise difference between closed-form and numeric generators."""
    a = generators(x, params, "closed_form")
    b = generators(x, params, "numeric_limit", U)
    diffs = [np.max(np.abs(a.J_plus - b.J_plus)), np.max(np.abs(a.J_minus - b.J_minus))]
    diffs += [np.max(np.abs(p - r)) for p, r in zip(a.qW, b.qW)]
    return float(max(diffs))


def q_commutation_exponent(gens: Generators) -> Tuple[int, float]:
    """
    The integer c with q^W_1 J_+ q^-W_1 = q^c J_+, and the residual of that identity.
    """
    d = gens.qW[0]
    conj = d @ gens.J_plus @ np.linalg.inv(d)
    j = gens.J_plus
    ratio = complex(np.vdot(j, conj) / np.vdot(j, j))
    q = gens.q
    c = int(round((np.log(ratio) / np.log(q)).real))
    residual = float(np.max(np.abs(conj - q**c * j)))
    return c, residual


def _norm_or_raise(f: StateVector) -> float:
    norm = f.norm()
    if not np.isfinite(norm) or norm == 0:
        raise NullVectorError("highest-weight residual of a null vector")
    return norm


def highest_weight_residual(f: StateVector, gens: Generators) -> float:
    """|J_+ f| / |f|."""
    norm = _norm_or_raise(f)
    return float(np.linalg.norm(gens.J_plus @ f.amplitudes)) / norm


def raising_residual(f: StateVector, gens: Generators) -> float:
    """Largest |T^{alpha beta} f| / |f| over the strictly lower limit blocks."""
    norm = _norm_or_raise(f)
    if not gens.raising:
        return highest_weight_residual(f, gens)
    return max(float(np.linalg.norm(b @ f.amplitudes)) / norm for b in gens.raising.values())


def doubled_highest_weight_residual(f: StateVector, x: Sequence[complex], params: QParams,
                                   U: float = DEFAULT_LIMIT) -> float:
    """Largest |T^{alpha beta}(x; +U) f| / |f| for the doubled monodromy, alpha > beta."""
    norm = _norm_or_raise(f)
    t = doubled_monodromy(MonodromySpec(tuple(x), U, params))
    scale = abs(1 - params.q**2)
    worst = 0.0
    for a in range(2, params.n + 1):
        for b in range(1, a):
            worst = max(worst, float(np.linalg.norm(t.block(a, b) @ f.amplitudes)) / (norm * scale))
    return worst


@dataclass(frozen=True)
class HighestWeightReport:
    generator_residual: float
    doubled_residual: float


def highest_weight_report(f: StateVector, x: Sequence[complex], params: QParams,
                          gens: Optional[Generators] = None,
                          U: float = DEFAULT_LIMIT) -> HighestWeightReport:
    """Both highest-weight paths, reported separately."""
    gens = gens or generators(x, params, "numeric_limit", U)
    return HighestWeightReport(
        generator_residual=raising_residual(f, gens),
        doubled_residual=doubled_highest_weight_residual(f, x, params, U),
    )


def support_grades(f: StateVector, rel_tol: float = 1e-10) -> List[Tuple[int, ...]]:
    """Distinct color-count vectors of the basis states carrying f."""
    amps = np.abs(f.amplitudes)
    if amps.max() == 0:
        return []
    counts = color_counts(f.shape)
    mask = amps > rel_tol * amps.max()
    return sorted({tuple(int(c) for c in row) for row in counts[mask]})


def weight_of(f: StateVector, gens: Generators) -> Weight:
    """Integer omega with q^W_alpha f = q^omega_alpha f."""
    return _measure_weight(f, gens.qW, gens.q)


def color_weight_of(f: StateVector, q: complex) -> Weight:
    """weight_of with the diagonal color-counting operators of any rank."""
    qw = [color_operator(f.shape, a, q) for a in range(1, f.shape.n + 1)]
    return _measure_weight(f, qw, q)


def _measure_weight(f: StateVector, qw: Sequence[np.ndarray], q: complex) -> Weight:
    norm = _norm_or_raise(f)
    omega: List[int] = []
    for d in qw:
        image = d @ f.amplitudes
        lam = complex(np.vdot(f.amplitudes, image) / np.vdot(f.amplitudes, f.amplitudes))
        if np.linalg.norm(image - lam * f.amplitudes) > EIGEN_TOL * norm * max(1.0, abs(lam)):
            raise GradingError("vector is not a weight vector", support_grades(f))
        exponent = np.log(lam) / np.log(q)
        w = int(round(exponent.real))
        if abs(exponent - w) > INTEGRALITY_TOL:
            raise GradingError(f"non-integral weight exponent {exponent}", support_grades(f))
        omega.append(w)
    return Weight(tuple(omega))
