"""
Monodromy matrices, their auxiliary-space blocks and the relations between them.

The quantum space V = (C^n)^N occupies sites 1..N; the auxiliary space is an
extra site appended after them. Three products are built:

    T_0(x; u)  = R_10(x_1 - u) ... R_N0(x_N - u)
    T(x; u)    = R^-1_N0 ... R^-1_10 . T_0(x; u)
    T^Q(x; i)  = R^-1_N0 ... R^-1_10 . R_10(x_1 - x_i) ... P_i0 ... R_N0(x_N - x_i - kappa)

and split into an n x n grid of maps on V indexed by the auxiliary output and
input colors (A = block(1,1), B_g = block(1,g), C = block(g,1), D_bg = block(b,g)).

On the all-color-1 state Omega the constant factors cancel the spectral ones up to
triangular terms: A Omega = A^Q Omega = Omega, D_bb Omega = q^N prod_j b(x_j - u) Omega,
D^Q Omega = 0 and so Q(x; i) Omega = Omega.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError
from .rmatrix import (
    QParams,
    b_weight,
    boltzmann,
    c_minus_over_b,
    r_constant,
    r_inverse,
    r_spectral,
    r_spectral_numerator,
)
from .tensorspace import (
    MATERIALIZE_CAP,
    LocalOperator,
    Program,
    SpaceShape,
    StateVector,
    apply_program,
    basis_rank,
    materialize,
)

logger = logging.getLogger(__name__)

RESIDUAL_BATCH = 16
RESIDUAL_SEED = 20240611

PROVENANCES = ("plain", "doubled", "shifted")


@dataclass(frozen=True)
class MonodromySpec:
    """
    Inhomogeneities x, auxiliary spectral parameter u and parameters.

    Sites listed in `regularized` (1-based) carry the numerator
    (q s - (q s)^-1) R(x_j - u) in place of R(x_j - u).
    """

    x: Tuple[complex, ...]
    u: complex
    params: QParams
    regularized: Tuple[int, ...] = ()

    def __post_init__(self):
        xs = tuple(complex(v) for v in self.x)
        if not xs:
            raise ShapeError("a monodromy needs at least one site")
        for j in self.regularized:
            if not 1 <= j <= len(xs):
                raise ShapeError(f"regularized site {j} outside 1..{len(xs)}")
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "u", complex(self.u))
        object.__setattr__(self, "regularized", tuple(sorted(set(self.regularized))))

    @property
    def shape(self) -> SpaceShape:
        return SpaceShape(self.params.n, len(self.x))


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """The n x n auxiliary-space blocks of a monodromy, each a dense map on V."""

    shape: SpaceShape
    blocks: np.ndarray = field(repr=False)
    params: QParams
    provenance: str = "plain"
    site: Optional[int] = None

    def __post_init__(self):
        n, dim = self.shape.n, self.shape.dim
        if self.blocks.shape != (n, n, dim, dim):
            raise ShapeError(
                f"blocks need shape {(n, n, dim, dim)}, got {self.blocks.shape}"
            )
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "shifted":
            if self.site is None or not 1 <= self.site <= self.shape.N:
                raise ShapeError(f"shifted monodromy needs a site in 1..{self.shape.N}")
        self.blocks.setflags(write=False)

    def block(self, alpha: int, beta: int) -> np.ndarray:
        n = self.shape.n
        if not (1 <= alpha <= n and 1 <= beta <= n):
            raise ShapeError(f"block ({alpha}, {beta}) outside 1..{n}")
        return self.blocks[alpha - 1, beta - 1]

    def a(self) -> np.ndarray:
        return self.block(1, 1)

    def b(self, gamma: int = 2) -> np.ndarray:
        return self.block(1, gamma)

    def c(self, gamma: int = 2) -> np.ndarray:
        return self.block(gamma, 1)

    def d(self, beta: int = 2, gamma: int = 2) -> np.ndarray:
        return self.block(beta, gamma)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


def constant_string(N: int, params: QParams, aux: int) -> List[Tuple[LocalOperator, Tuple[int, int]]]:
    """R^-1_N0 ... R^-1_10 with the quantum site listed first in every factor."""
    r_inv = LocalOperator(params.n, 2, r_inverse(params))
    return [(r_inv, (j, aux)) for j in range(N, 0, -1)]


def spectral_string(x: Sequence[complex], u: complex, params: QParams, aux: int,
                    regularized: Sequence[int] = ()) -> List[Tuple[LocalOperator, Tuple[int, int]]]:
    r_inv = r_inverse(params)
    factors = []
    for j, xj in enumerate(x, start=1):
        if j in regularized:
            op = r_spectral_numerator(xj - u, params, r_inv)
        else:
            op = r_spectral(xj - u, params, r_inv)
        factors.append((op, (j, aux)))
    return factors


def shifted_string(x: Sequence[complex], i: int, params: QParams,
                   aux: int) -> List[Tuple[LocalOperator, Tuple[int, int]]]:
    """Spectral factors of T^Q(x; i): the swap at site i, kappa-shifted arguments after it."""
    if not 1 <= i <= len(x):
        raise ShapeError(f"site {i} outside 1..{len(x)}")
    r_inv = r_inverse(params)
    xi = x[i - 1]
    factors = []
    for j, xj in enumerate(x, start=1):
        if j < i:
            op = r_spectral(xj - xi, params, r_inv)
        elif j == i:
            op = LocalOperator.swap(params.n)
        else:
            op = r_spectral(xj - xi - params.kappa, params, r_inv)
        factors.append((op, (j, aux)))
    return factors


def monodromy_program(kind: str, x: Sequence[complex], params: QParams, aux: int,
                      u: Optional[complex] = None, i: Optional[int] = None,
                      regularized: Sequence[int] = ()) -> Program:
    """Written factor list of a monodromy whose auxiliary space sits at `aux`."""
    N = len(x)
    if kind == "plain":
        return spectral_string(x, u, params, aux, regularized)
    if kind == "doubled":
        return constant_string(N, params, aux) + spectral_string(x, u, params, aux, regularized)
    if kind == "shifted":
        return constant_string(N, params, aux) + shifted_string(x, i, params, aux)
    raise ValueError(f"unknown monodromy kind {kind!r}")


def _split_blocks(program: Program, shape: SpaceShape) -> np.ndarray:
    n = shape.n
    full = materialize(program, shape.extended())
    blocks = np.empty((n, n, shape.dim, shape.dim), dtype=np.complex128)
    for alpha in range(n):
        for beta in range(n):
            blocks[alpha, beta] = full[alpha::n, beta::n]
    return blocks


def _build(kind: str, x: Sequence[complex], params: QParams, u: Optional[complex] = None,
           i: Optional[int] = None, regularized: Sequence[int] = ()) -> BlockOperator:
    shape = SpaceShape(params.n, len(x))
    if shape.extended().dim > MATERIALIZE_CAP:
        raise ShapeError(
            f"dense blocks need n^(N+1) <= {MATERIALIZE_CAP}; use apply_block instead"
        )
    program = monodromy_program(kind, x, params, shape.N + 1, u=u, i=i, regularized=regularized)
    blocks = _split_blocks(program, shape)
    return BlockOperator(shape, blocks, params, provenance=kind, site=i)


def monodromy_T(spec: MonodromySpec) -> BlockOperator:
    """T_0(x; u) as auxiliary-space blocks."""
    return _build("plain", spec.x, spec.params, u=spec.u, regularized=spec.regularized)


def doubled_monodromy(spec: MonodromySpec) -> BlockOperator:
    """The doubled monodromy T(x; u) = R^-1_N0 ... R^-1_10 T_0(x; u)."""
    return _build("doubled", spec.x, spec.params, u=spec.u, regularized=spec.regularized)


def shifted_monodromy(x: Sequence[complex], i: int, params: QParams) -> BlockOperator:
    """T^Q(x; i); independent of any auxiliary spectral parameter."""
    x = tuple(complex(v) for v in x)
    if not 1 <= i <= len(x):
        raise ShapeError(f"site {i} outside 1..{len(x)}")
    return _build("shifted", x, params, i=i)


def apply_block(kind: str, x: Sequence[complex], params: QParams, alpha: int, beta: int,
                state: StateVector, u: Optional[complex] = None,
                i: Optional[int] = None, regularized: Sequence[int] = ()) -> StateVector:
    """
    Matrix-free action of block (alpha, beta) on a state.

    The state is tensored with the auxiliary basis vector beta, pushed through
    the factor list and projected on auxiliary color alpha.
    """
    shape = state.shape
    n = shape.n
    if len(x) != shape.N or params.n != n:
        raise ShapeError("state shape does not match the monodromy")
    ext = shape.extended()
    lifted = np.zeros(ext.dim, dtype=np.complex128)
    lifted[beta - 1::n] = state.amplitudes
    program = monodromy_program(kind, x, params, ext.N, u=u, i=i, regularized=regularized)
    out = apply_program(program, ext, lifted)
    return StateVector(shape, out[alpha - 1::n])


def shifted_inhomogeneities(x: Sequence[complex], i: int, kappa: complex) -> Tuple[complex, ...]:
    """x' with x_i replaced by x_i + kappa."""
    xs = [complex(v) for v in x]
    xs[i - 1] += kappa
    return tuple(xs)


def markov_weights(params: QParams) -> List[complex]:
    """Weights 1, q^e, q^(2e), ... of the Markov trace, e = markov_exponent."""
    e = params.markov_exponent
    return [params.q ** (e * (alpha - 1)) for alpha in range(1, params.n + 1)]


def q_trace(tq: BlockOperator) -> np.ndarray:
    """Q(x; i) = A^Q + sum_{alpha >= 2} q^(e (alpha - 1)) D^Q_{alpha alpha}."""
    if tq.provenance != "shifted":
        raise ValueError(f"q_trace needs a shifted monodromy, got {tq.provenance!r}")
    weights = markov_weights(tq.params)
    total = tq.a().copy()
    for alpha in range(2, tq.shape.n + 1):
        total = total + weights[alpha - 1] * tq.d(alpha, alpha)
    return total


def reference_vector(shape: SpaceShape) -> np.ndarray:
    omega = np.zeros(shape.dim, dtype=np.complex128)
    omega[basis_rank([1] * shape.N, shape)] = 1.0
    return omega


# ---------------------------------------------------------------------------
# Vacuum actions
# ---------------------------------------------------------------------------


@dataclass
class VacuumReport:
    """Measured action of the blocks on the reference state."""

    a_residual: float
    c_norm: float
    d_eigenvalue: complex
    d_parallel_residual: float
    d_predicted: complex
    aq_residuals: List[float]
    dq_norms: List[float]
    q_residuals: List[float]

    def to_dict(self) -> Dict[str, object]:
        return {
            "a_residual": self.a_residual,
            "c_norm": self.c_norm,
            "d_eigenvalue": self.d_eigenvalue,
            "d_parallel_residual": self.d_parallel_residual,
            "d_predicted": self.d_predicted,
            "aq_residuals": self.aq_residuals,
            "dq_norms": self.dq_norms,
            "q_residuals": self.q_residuals,
        }


def vacuum_eigenvalue_d(x: Sequence[complex], u: complex, params: QParams) -> complex:
    """Eigenvalue q^N prod_j b(x_j - u) of every D_bb(u) on the reference state."""
    q = params.q
    return q ** len(x) * complex(np.prod([b_weight(complex(xj) - u, params) for xj in x]))


def vacuum_actions(x: Sequence[complex], u: complex, params: QParams) -> VacuumReport:
    """Act with the doubled and every shifted monodromy on the reference state."""
    x = tuple(complex(v) for v in x)
    shape = SpaceShape(params.n, len(x))
    omega = reference_vector(shape)
    n = shape.n

    t = doubled_monodromy(MonodromySpec(x, u, params))
    a_residual = float(np.linalg.norm(t.a() @ omega - omega))
    c_norm = max(float(np.linalg.norm(t.c(g) @ omega)) for g in range(2, n + 1))
    d_eig = complex(np.vdot(omega, t.d(2, 2) @ omega))
    d_parallel = 0.0
    for beta in range(2, n + 1):
        for gamma in range(2, n + 1):
            target = d_eig * omega if beta == gamma else 0 * omega
            d_parallel = max(d_parallel, float(np.linalg.norm(t.d(beta, gamma) @ omega - target)))

    aq_res: List[float] = []
    dq_norms: List[float] = []
    q_res: List[float] = []
    for i in range(1, shape.N + 1):
        tq = shifted_monodromy(x, i, params)
        aq_res.append(float(np.linalg.norm(tq.a() @ omega - omega)))
        dq_norms.append(max(
            float(np.linalg.norm(tq.d(beta, gamma) @ omega))
            for beta in range(2, n + 1) for gamma in range(2, n + 1)
        ))
        q_res.append(float(np.linalg.norm(q_trace(tq) @ omega - omega)))

    logger.debug(f"Vacuum actions for N={shape.N}, n={n}: D eigenvalue {d_eig:.6g}")
    return VacuumReport(
        a_residual=a_residual,
        c_norm=c_norm,
        d_eigenvalue=d_eig,
        d_parallel_residual=d_parallel,
        d_predicted=vacuum_eigenvalue_d(x, u, params),
        aq_residuals=aq_res,
        dq_norms=dq_norms,
        q_residuals=q_res,
    )


# ---------------------------------------------------------------------------
# Exchange relations on V (x) V_a (x) V_b
# ---------------------------------------------------------------------------

EXCHANGE_KINDS = ("TT", "TQ")
EXCHANGE_VARIANTS = ("holding", "printed")


def _relative(diff: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(diff)) / max(1.0, float(np.max(np.abs(scale)))))


def exchange_residual(kind: str, x: Sequence[complex], params: QParams,
                      u: complex, v: Optional[complex] = None, i: Optional[int] = None,
                      variant: str = "holding") -> float:
    """
    Residual of the exchange relation between two monodromies in two auxiliary spaces.

    TT:  R_ab(v-u) T_a(u) R^-1_ab T_b(v) = T_b(v) R^-1_ba T_a(u) R_ba(v-u)
    TQ:  R_ba(x_i-u) T_b(x';u) R^-1_ba T^Q_a(x;i) = T^Q_a(x;i) R^-1_ab T_b(x;u) R_ab(x_i+kappa-u)

    The printed TT variant carries the constant R_ba in both middles.
    """
    if kind not in EXCHANGE_KINDS:
        raise ValueError(f"unknown exchange kind {kind!r}")
    if variant not in EXCHANGE_VARIANTS:
        raise ValueError(f"unknown exchange variant {variant!r}")
    x = tuple(complex(val) for val in x)
    N = len(x)
    shape = SpaceShape(params.n, N + 2)
    a, b = N + 1, N + 2
    r = r_constant(params)
    r_inv_entries = r_inverse(params)
    r_inv = LocalOperator(params.n, 2, r_inv_entries)

    if kind == "TT":
        if v is None:
            raise ValueError("TT exchange needs a second spectral parameter v")
        if abs(complex(u) - complex(v)) <= params.pole_guard:
            raise ValueError("TT exchange needs distinct spectral parameters")
        r_vu = r_spectral(complex(v) - complex(u), params, r_inv_entries)
        ta = monodromy_program("doubled", x, params, a, u=u)
        tb = monodromy_program("doubled", x, params, b, u=v)
        if variant == "holding":
            left_mid, right_mid = (r_inv, (a, b)), (r_inv, (b, a))
        else:
            left_mid, right_mid = (r, (b, a)), (r, (b, a))
        lhs = [(r_vu, (a, b))] + list(ta) + [left_mid] + list(tb)
        rhs = list(tb) + [right_mid] + list(ta) + [(r_vu, (b, a))]
    else:
        if i is None or not 1 <= i <= N:
            raise ShapeError(f"TQ exchange needs a site in 1..{N}")
        xi = x[i - 1]
        xp = shifted_inhomogeneities(x, i, params.kappa)
        tq = monodromy_program("shifted", x, params, a, i=i)
        tb_shift = monodromy_program("doubled", xp, params, b, u=u)
        tb = monodromy_program("doubled", x, params, b, u=u)
        r_left = r_spectral(xi - u, params, r_inv_entries)
        r_right = r_spectral(xi + params.kappa - u, params, r_inv_entries)
        lhs = [(r_left, (b, a))] + list(tb_shift) + [(r_inv, (b, a))] + list(tq)
        rhs = list(tq) + [(r_inv, (a, b))] + list(tb) + [(r_right, (a, b))]

    left = materialize(lhs, shape)
    right = materialize(rhs, shape)
    return _relative(left - right, left)


# ---------------------------------------------------------------------------
# Commutation relations between blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationResidual:
    """One evaluated relation: its residual and whether it is expected to hold."""

    relation: str
    residual: float
    expectation: str  # holds | fails | report
    detail: str = ""

    @property
    def as_expected(self) -> bool:
        if self.expectation == "holds":
            return self.residual <= RELATION_TOLERANCE
        if self.expectation == "fails":
            return self.residual > FAILURE_THRESHOLD
        return True


RELATION_TOLERANCE = 1e-10
FAILURE_THRESHOLD = 1e-2


@dataclass(frozen=True)
class RelationSpec:
    relation: str
    expectation: str
    description: str
    min_rank: int = 2
    max_rank: Optional[int] = None

    def applies_to(self, n: int) -> bool:
        return n >= self.min_rank and (self.max_rank is None or n <= self.max_rank)


RELATIONS: Dict[str, RelationSpec] = {
    spec.relation: spec
    for spec in [
        RelationSpec("bb", "holds", "[B_g(u), B_g(v)] = 0 for equal colors"),
        RelationSpec("bqb", "holds", "B^Q_g B_g(x;u) = B_g(x';u) B^Q_g"),
        RelationSpec("ab", "holds", "A(u) B_g(v) exchange with the summed B_s(u) D_sg(v) term"),
        RelationSpec("ab_printed", "fails", "A(u) B(v) with the c_-/b unwanted term", max_rank=2),
        RelationSpec("ab_printed_sln", "fails", "A(u) B_g(v) with the c_-/b unwanted term", min_rank=3),
        RelationSpec("db", "holds", "D(u) B(v) two-term exchange", max_rank=2),
        RelationSpec("db_printed", "fails", "D(u) B(v) with A(u) in the wanted term", max_rank=2),
        RelationSpec("db_corrected", "report", "D(u) B(v) with D(u) in the wanted term", max_rank=2),
        RelationSpec("db_printed_sln", "report", "D_bg(u) B_d(v) with R-matrix contractions", min_rank=3),
        RelationSpec("aqb", "holds", "A^Q B_g(u) exchange with the summed B^Q_s D_sg(u) term"),
        RelationSpec("aqb_printed", "report", "A^Q B_g(u) with the c_-/b unwanted term"),
        RelationSpec("dqb", "holds", "D^Q B(x;u) two-term exchange", max_rank=2),
        RelationSpec("dqb_printed", "fails", "D^Q B(u) with q/b in the wanted term", max_rank=2),
        RelationSpec("dqb_printed_sln", "report", "D^Q_bg B_d(u) with R-matrix contractions", min_rank=3),
    ]
}


def relations_for(n: int) -> List[str]:
    return [name for name, spec in RELATIONS.items() if spec.applies_to(n)]


def _random_batch(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((dim, RESIDUAL_BATCH)) + 1j * rng.standard_normal((dim, RESIDUAL_BATCH))


def _r_entry(r: np.ndarray, n: int, a: int, b: int, c: int, d: int) -> complex:
    """R^{ab}_{cd}: row (a, b), column (c, d), 1-based colors."""
    return r[(a - 1) * n + (b - 1), (c - 1) * n + (d - 1)]


class _RelationContext:
    """Blocks and scalars shared by every relation at one parameter point."""

    def __init__(self, x: Tuple[complex, ...], params: QParams, u: complex, v: complex, i: int):
        self.x = x
        self.params = params
        self.u = u
        self.v = v
        self.i = i
        self.n = params.n
        self.xp = shifted_inhomogeneities(x, i, params.kappa)
        self.tu = doubled_monodromy(MonodromySpec(x, u, params))
        self.tv = doubled_monodromy(MonodromySpec(x, v, params))
        self.tup = doubled_monodromy(MonodromySpec(self.xp, u, params))
        self.tq = shifted_monodromy(x, i, params)
        self.greek = range(2, self.n + 1)
        self.r_const = r_constant(params).entries
        self.xi = x[i - 1]


def _pairs_bb(c: _RelationContext):
    for g in c.greek:
        yield c.tu.b(g) @ c.tv.b(g), c.tv.b(g) @ c.tu.b(g)


def _pairs_bqb(c: _RelationContext):
    for g in c.greek:
        yield c.tq.b(g) @ c.tu.b(g), c.tup.b(g) @ c.tq.b(g)


def _pairs_ab(c: _RelationContext):
    q = c.params.q
    a = q / b_weight(c.u - c.v, c.params)
    for g in c.greek:
        lhs = c.tu.a() @ c.tv.b(g)
        rhs = a * c.tv.b(g) @ c.tu.a() + (1 - a) * c.tu.b(g) @ c.tv.a()
        for s in c.greek:
            rhs = rhs + (q**2 - 1) * c.tu.b(s) @ c.tv.d(s, g)
        yield lhs, rhs


def _pairs_ab_printed(c: _RelationContext):
    q = c.params.q
    y = c.u - c.v
    alpha = 1 / (q * b_weight(y, c.params))
    ratio = c_minus_over_b(y, c.params)
    for g in c.greek:
        lhs = c.tu.a() @ c.tv.b(g)
        unwanted = ratio * c.tu.b(g) @ c.tv.a()
        for s in c.greek:
            unwanted = unwanted + (q - 1 / q) * c.tu.b(s) @ c.tv.d(s, g)
        yield lhs, alpha * c.tv.b(g) @ c.tu.a() - unwanted / q


def _rel_db(c: _RelationContext) -> Tuple[np.ndarray, np.ndarray]:
    q = c.params.q
    lhs = c.tu.d() @ c.tv.b()
    rhs = (1 / (q * b_weight(c.v - c.u, c.params))) * c.tv.b() @ c.tu.d() \
        + c_minus_over_b(c.u - c.v, c.params) / q * c.tu.b() @ c.tv.d()
    return lhs, rhs


def _db_two_term(c: _RelationContext, wanted_right: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    q = c.params.q
    y = c.v - c.u
    lhs = c.tu.d() @ c.tv.b()
    rhs = (q / b_weight(y, c.params)) * c.tv.b() @ wanted_right \
        - q * c_minus_over_b(y, c.params) * c.tu.b() @ c.tv.d()
    return lhs, rhs


def _rel_db_printed(c: _RelationContext):
    return _db_two_term(c, c.tu.a())


def _rel_db_corrected(c: _RelationContext):
    return _db_two_term(c, c.tu.d())


def _pairs_d_contracted(c: _RelationContext, left_d: BlockOperator, b_wanted: BlockOperator,
                        d_wanted: BlockOperator, b_unwanted: BlockOperator,
                        d_unwanted: BlockOperator, b_op: BlockOperator, y: complex):
    """
    D_bg B_d = q b^-1(y) [ B_g''(.) D_b'd'(.) R^{d'g'}_{dg}(y) R^{g''b}_{b'g'}
                          - c_-(y) R^{g'b}_{b'g} B_g'(.) D_b'd(.) ]
    with every greek index running over 2..n.
    """
    n = c.n
    q = c.params.q
    r_y = r_spectral(y, c.params).entries
    r_0 = c.r_const
    weights = boltzmann(y, c.params)
    pref = q / weights.b
    for beta in c.greek:
        for gamma in c.greek:
            for delta in c.greek:
                lhs = left_d.d(beta, gamma) @ b_op.b(delta)
                acc = np.zeros_like(lhs)
                for g2 in c.greek:
                    for b1 in c.greek:
                        for d1 in c.greek:
                            for g1 in c.greek:
                                w = (_r_entry(r_y, n, d1, g1, delta, gamma)
                                     * _r_entry(r_0, n, g2, beta, b1, g1))
                                if w != 0:
                                    acc = acc + w * b_wanted.b(g2) @ d_wanted.d(b1, d1)
                for g1 in c.greek:
                    for b1 in c.greek:
                        w = _r_entry(r_0, n, g1, beta, b1, gamma)
                        if w != 0:
                            acc = acc - weights.c_minus * w * b_unwanted.b(g1) @ d_unwanted.d(b1, delta)
                yield lhs, pref * acc


def _pairs_db_printed_sln(c: _RelationContext):
    yield from _pairs_d_contracted(c, c.tu, c.tv, c.tu, c.tu, c.tv, c.tv, c.v - c.u)


def _pairs_aqb(c: _RelationContext):
    q = c.params.q
    a = q / b_weight(c.xi + c.params.kappa - c.u, c.params)
    for g in c.greek:
        lhs = c.tq.a() @ c.tu.b(g)
        rhs = a * c.tup.b(g) @ c.tq.a() + (1 - a) * c.tq.b(g) @ c.tu.a()
        for s in c.greek:
            rhs = rhs + (q**2 - 1) * c.tq.b(s) @ c.tu.d(s, g)
        yield lhs, rhs


def _pairs_aqb_printed(c: _RelationContext):
    q = c.params.q
    y = c.xi + c.params.kappa - c.u
    a = 1 / (q * b_weight(y, c.params))
    ratio = c_minus_over_b(y, c.params)
    for g in c.greek:
        lhs = c.tq.a() @ c.tu.b(g)
        unwanted = ratio * c.tq.b(g) @ c.tu.a()
        for s in c.greek:
            unwanted = unwanted + (q - 1 / q) * c.tq.b(s) @ c.tu.d(s, g)
        yield lhs, a * c.tup.b(g) @ c.tq.a() - unwanted / q


def _rel_dqb(c: _RelationContext) -> Tuple[np.ndarray, np.ndarray]:
    q = c.params.q
    lhs = c.tq.d() @ c.tu.b()
    rhs = (1 / (q * b_weight(c.u - c.xi, c.params))) * c.tup.b() @ c.tq.d() \
        + c_minus_over_b(c.xi - c.u, c.params) / q * c.tq.b() @ c.tu.d()
    return lhs, rhs


def _rel_dqb_printed(c: _RelationContext) -> Tuple[np.ndarray, np.ndarray]:
    q = c.params.q
    lhs = c.tq.d() @ c.tu.b()
    rhs = (q / b_weight(c.xi - c.u, c.params)) * c.tup.b() @ c.tq.d() \
        - q * c_minus_over_b(c.u - c.xi, c.params) * c.tq.b() @ c.tu.d()
    return lhs, rhs


def _pairs_dqb_printed_sln(c: _RelationContext):
    yield from _pairs_d_contracted(c, c.tq, c.tup, c.tq, c.tq, c.tu, c.tu, c.u - c.xi)


def _single(fn: Callable[[_RelationContext], Tuple[np.ndarray, np.ndarray]]):
    def pairs(c: _RelationContext):
        yield fn(c)
    return pairs


_EVALUATORS = {
    "bb": _pairs_bb,
    "bqb": _pairs_bqb,
    "ab": _pairs_ab,
    "ab_printed": _pairs_ab_printed,
    "ab_printed_sln": _pairs_ab_printed,
    "db": _single(_rel_db),
    "db_printed": _single(_rel_db_printed),
    "db_corrected": _single(_rel_db_corrected),
    "db_printed_sln": _pairs_db_printed_sln,
    "aqb": _pairs_aqb,
    "aqb_printed": _pairs_aqb_printed,
    "dqb": _single(_rel_dqb),
    "dqb_printed": _single(_rel_dqb_printed),
    "dqb_printed_sln": _pairs_dqb_printed_sln,
}


def commutation_residuals(x: Sequence[complex], params: QParams, u: complex, v: complex,
                          i: int = 1, relations: Optional[Sequence[str]] = None,
                          seed: int = RESIDUAL_SEED) -> List[RelationResidual]:
    """
    Evaluate block relations on a seeded batch of random states.

    Each residual is max |(LHS - RHS) X| / max(1, max |LHS X|) over the batch X,
    maximised over the free color indices of the relation.
    """
    x = tuple(complex(val) for val in x)
    if not 1 <= i <= len(x):
        raise ShapeError(f"site {i} outside 1..{len(x)}")
    names = list(relations) if relations is not None else relations_for(params.n)
    for name in names:
        if name not in RELATIONS:
            raise ValueError(f"unknown relation {name!r}")
        if not RELATIONS[name].applies_to(params.n):
            raise ValueError(f"relation {name!r} is not defined for n={params.n}")

    ctx = _RelationContext(x, params, complex(u), complex(v), i)
    batch = _random_batch(ctx.tu.shape.dim, seed)
    results = []
    for name in names:
        worst = 0.0
        for lhs, rhs in _EVALUATORS[name](ctx):
            left = lhs @ batch
            worst = max(worst, _relative(left - rhs @ batch, left))
        spec = RELATIONS[name]
        results.append(RelationResidual(name, worst, spec.expectation, spec.description))
        logger.debug(f"Relation {name}: residual {worst:.3e} (expected to {spec.expectation})")
    return results
