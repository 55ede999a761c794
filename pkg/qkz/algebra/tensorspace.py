"""
Tensor-space kernels for V = (C^n)^N.

Basis vectors are ranked with site 1 most significant, so the digit string
(d_1, ..., d_N) with d_k in 1..n maps to sum_k (d_k - 1) n^(N-k). Operators act
on coordinate columns: a LocalOperator's row indexes the output digits and its
column the input digits, first listed site most significant.

Site-local application reshapes the state into an N-axis tensor, contracts the
operator against the target axes and moves the new axes back in place, so the
full n^N x n^N matrix is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..errors import ShapeError

MAX_DIMENSION = 2**26
MATERIALIZE_CAP = 2**12


@dataclass(frozen=True)
class SpaceShape:
    """Local dimension n and number of sites N."""

    n: int
    N: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ShapeError(f"local dimension must be an integer >= 2, got {self.n}")
        if int(self.N) != self.N or self.N < 1:
            raise ShapeError(f"number of sites must be an integer >= 1, got {self.N}")
        if self.n**self.N > MAX_DIMENSION:
            raise ShapeError(
                f"dimension {self.n}^{self.N} exceeds the cap of {MAX_DIMENSION}"
            )

    @property
    def dim(self) -> int:
        return self.n**self.N

    def extended(self, extra: int = 1) -> "SpaceShape":
        """The shape with `extra` auxiliary sites appended after site N."""
        return SpaceShape(self.n, self.N + extra)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over the rank-ordered basis of a SpaceShape."""

    shape: SpaceShape
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] != self.shape.dim:
            raise ShapeError(
                f"amplitude length {amps.shape} does not match dimension {self.shape.dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ShapeError("state vector contains NaN or Inf amplitudes")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, shape: SpaceShape, digits: Sequence[int]) -> "StateVector":
        amps = np.zeros(shape.dim, dtype=np.complex128)
        amps[basis_rank(digits, shape)] = 1.0
        return cls(shape, amps)

    @classmethod
    def zeros(cls, shape: SpaceShape) -> "StateVector":
        return cls(shape, np.zeros(shape.dim, dtype=np.complex128))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def scaled(self, alpha: complex) -> "StateVector":
        return StateVector(self.shape, alpha * self.amplitudes)

    def __add__(self, other: "StateVector") -> "StateVector":
        if other.shape != self.shape:
            raise ShapeError(f"cannot add states of shapes {self.shape} and {other.shape}")
        return StateVector(self.shape, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + other.scaled(-1.0)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A dense operator on one or two tensor factors of local dimension n."""

    n: int
    arity: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ShapeError(f"arity must be 1 or 2, got {self.arity}")
        entries = np.asarray(self.entries, dtype=np.complex128)
        size = self.n**self.arity
        if entries.shape != (size, size):
            raise ShapeError(
                f"operator of arity {self.arity} on C^{self.n} needs shape "
                f"({size}, {size}), got {entries.shape}"
            )
        entries = entries.copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, n: int, arity: int = 1) -> "LocalOperator":
        return cls(n, arity, np.eye(n**arity))

    @classmethod
    def swap(cls, n: int) -> "LocalOperator":
        """The permutation v_i (x) v_j -> v_j (x) v_i."""
        entries = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                entries[j * n + i, i * n + j] = 1.0
        return cls(n, 2, entries)

    def matmul(self, other: "LocalOperator") -> "LocalOperator":
        if (other.n, other.arity) != (self.n, self.arity):
            raise ShapeError("operator product needs matching n and arity")
        return LocalOperator(self.n, self.arity, self.entries @ other.entries)


# A program is a written operator product: factors listed left to right.
Program = Sequence[Tuple[LocalOperator, Sequence[int]]]


def basis_rank(digits: Sequence[int], shape: SpaceShape) -> int:
    """Rank of a basis state given its 1-based site digits."""
    if len(digits) != shape.N:
        raise ShapeError(f"expected {shape.N} digits, got {len(digits)}")
    index = 0
    for d in digits:
        if int(d) != d or not 1 <= d <= shape.n:
            raise ShapeError(f"digit {d} outside 1..{shape.n}")
        index = index * shape.n + (int(d) - 1)
    return index


def basis_unrank(index: int, shape: SpaceShape) -> Tuple[int, ...]:
    if not 0 <= index < shape.dim:
        raise ShapeError(f"index {index} outside 0..{shape.dim - 1}")
    digits: List[int] = []
    for _ in range(shape.N):
        index, r = divmod(index, shape.n)
        digits.append(r + 1)
    return tuple(reversed(digits))


def color_counts(shape: SpaceShape) -> np.ndarray:
    """Array of shape (dim, n): how many sites of each basis state carry each color."""
    digits = np.indices((shape.n,) * shape.N).reshape(shape.N, -1)
    return np.stack([(digits == a).sum(axis=0) for a in range(shape.n)], axis=1)


def _check_sites(op: LocalOperator, sites: Sequence[int], shape: SpaceShape) -> List[int]:
    if op.n != shape.n:
        raise ShapeError(f"operator acts on C^{op.n} but the space has n={shape.n}")
    if len(sites) != op.arity:
        raise ShapeError(f"operator of arity {op.arity} given {len(sites)} sites")
    if len(set(sites)) != len(sites):
        raise ShapeError(f"duplicate site in {list(sites)}")
    for s in sites:
        if not 1 <= s <= shape.N:
            raise ShapeError(f"site {s} outside 1..{shape.N}")
    return [s - 1 for s in sites]


def apply_array(op: LocalOperator, sites: Sequence[int], shape: SpaceShape,
                array: np.ndarray) -> np.ndarray:
    """
    Apply `op` on 1-based `sites` to an array whose leading axis spans V.

    Trailing axes are carried along untouched, so a (dim, k) array is k columns
    processed at once. Returns a new array.
    """
    axes = _check_sites(op, sites, shape)
    k = op.arity
    n = shape.n
    batch = array.shape[1:]
    tensor = array.reshape((n,) * shape.N + batch)
    gate = op.entries.reshape((n,) * (2 * k))
    out = np.tensordot(gate, tensor, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(array.shape)


def apply_local(op: LocalOperator, sites: Sequence[int], state: StateVector) -> StateVector:
    """Act with `op` on the listed tensor factors of `state`, identity elsewhere."""
    out = apply_array(op, sites, state.shape, np.asarray(state.amplitudes))
    return StateVector(state.shape, out)


def apply_program(program: Program, shape: SpaceShape, array: np.ndarray) -> np.ndarray:
    """Apply a written product to an array; the rightmost factor acts first."""
    out = np.asarray(array, dtype=np.complex128)
    for op, sites in reversed(list(program)):
        out = apply_array(op, sites, shape, out)
    return out


def materialize(program: Program, shape: SpaceShape) -> np.ndarray:
    """
    Dense matrix of a written operator product.

    Every basis column is pushed through the program with the same kernel that
    apply_local uses. Limited to n^N <= 2^12.
    """
    if shape.dim > MATERIALIZE_CAP:
        raise ShapeError(
            f"materialize is capped at dimension {MATERIALIZE_CAP}, got {shape.dim}"
        )
    return apply_program(program, shape, np.eye(shape.dim, dtype=np.complex128))


def embed_dense(op: LocalOperator, sites: Iterable[int], shape: SpaceShape) -> np.ndarray:
    """Independent Kronecker construction of a site-embedded operator, for oracles."""
    sites = list(sites)
    _check_sites(op, sites, shape)
    n = shape.n
    order = sites + [s for s in range(1, shape.N + 1) if s not in sites]
    full = np.kron(op.entries, np.eye(n ** (shape.N - op.arity)))
    # full acts on the factors listed in `order`; permute them back to 1..N.
    perm = [order.index(s) for s in range(1, shape.N + 1)]
    t = full.reshape((n,) * (2 * shape.N))
    t = t.transpose(perm + [shape.N + p for p in perm])
    return t.reshape(shape.dim, shape.dim)
