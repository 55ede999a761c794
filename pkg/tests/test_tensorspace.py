"""Tests for the qkz.algebra.tensorspace module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkz.algebra.tensorspace import (
    MATERIALIZE_CAP,
    LocalOperator,
    SpaceShape,
    StateVector,
    apply_local,
    basis_rank,
    basis_unrank,
    color_counts,
    embed_dense,
    materialize,
)
from qkz.errors import ShapeError


def random_operator(rng, n, arity):
    size = n**arity
    return LocalOperator(n, arity, rng.standard_normal((size, size))
                         + 1j * rng.standard_normal((size, size)))


def random_state(rng, shape):
    return StateVector(shape, rng.standard_normal(shape.dim) + 1j * rng.standard_normal(shape.dim))


# =============================================================================
# SHAPES AND BASIS
# =============================================================================


class TestSpaceShape:
    """Tests for SpaceShape."""

    def test_dimension(self):
        assert SpaceShape(2, 3).dim == 8
        assert SpaceShape(3, 2).dim == 9

    def test_extended_appends_sites(self):
        assert SpaceShape(2, 3).extended() == SpaceShape(2, 4)
        assert SpaceShape(3, 1).extended(2).N == 3

    @pytest.mark.parametrize("n,N", [(1, 2), (2, 0), (2.5, 2)])
    def test_invalid_shapes_rejected(self, n, N):
        with pytest.raises(ShapeError):
            SpaceShape(n, N)

    def test_dimension_cap(self):
        with pytest.raises(ShapeError, match="exceeds"):
            SpaceShape(2, 27)


class TestBasisRank:
    """Site 1 is the most significant digit."""

    def test_rank_values(self):
        shape = SpaceShape(2, 3)
        assert basis_rank((1, 1, 1), shape) == 0
        assert basis_rank((1, 1, 2), shape) == 1
        assert basis_rank((2, 1, 1), shape) == 4
        assert basis_rank((2, 2, 2), shape) == 7

    def test_unrank_inverts_rank(self):
        shape = SpaceShape(3, 3)
        for index in range(shape.dim):
            assert basis_rank(basis_unrank(index, shape), shape) == index

    def test_digit_out_of_range(self):
        with pytest.raises(ShapeError):
            basis_rank((1, 3), SpaceShape(2, 2))

    def test_wrong_length(self):
        with pytest.raises(ShapeError):
            basis_rank((1,), SpaceShape(2, 2))

    def test_unrank_out_of_range(self):
        with pytest.raises(ShapeError):
            basis_unrank(9, SpaceShape(3, 2))

    def test_color_counts_sum_to_sites(self):
        shape = SpaceShape(3, 4)
        counts = color_counts(shape)
        assert counts.shape == (shape.dim, 3)
        assert np.all(counts.sum(axis=1) == 4)
        assert tuple(counts[basis_rank((1, 3, 3, 2), shape)]) == (1, 1, 2)


class TestStateVector:
    """Tests for StateVector."""

    def test_basis_state(self):
        shape = SpaceShape(2, 2)
        state = StateVector.basis(shape, (2, 1))
        assert state.amplitudes[2] == 1.0
        assert state.norm() == 1.0

    def test_amplitudes_are_read_only(self):
        state = StateVector.zeros(SpaceShape(2, 2))
        with pytest.raises(ValueError):
            state.amplitudes[0] = 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(ShapeError):
            StateVector(SpaceShape(2, 1), np.array([1.0, np.nan]))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            StateVector(SpaceShape(2, 2), np.ones(3))

    def test_arithmetic(self):
        shape = SpaceShape(2, 1)
        a = StateVector.basis(shape, (1,))
        b = StateVector.basis(shape, (2,))
        assert np.allclose((a + b.scaled(2.0)).amplitudes, [1.0, 2.0])
        assert np.allclose((a - a).amplitudes, 0.0)

    def test_adding_different_shapes_fails(self):
        with pytest.raises(ShapeError):
            StateVector.zeros(SpaceShape(2, 1)) + StateVector.zeros(SpaceShape(2, 2))


# =============================================================================
# LOCAL OPERATORS
# =============================================================================


class TestLocalOperator:
    """Tests for LocalOperator construction and application."""

    def test_wrong_entry_shape(self):
        with pytest.raises(ShapeError):
            LocalOperator(2, 2, np.eye(2))

    def test_arity_limited(self):
        with pytest.raises(ShapeError):
            LocalOperator(2, 3, np.eye(8))

    def test_swap_exchanges_factors(self):
        shape = SpaceShape(3, 2)
        state = StateVector.basis(shape, (1, 3))
        swapped = apply_local(LocalOperator.swap(3), (1, 2), state)
        assert np.allclose(swapped.amplitudes, StateVector.basis(shape, (3, 1)).amplitudes)

    def test_swap_squares_to_identity(self):
        p = LocalOperator.swap(3)
        assert np.allclose(p.matmul(p).entries, np.eye(9))

    def test_matmul_needs_matching_operators(self):
        with pytest.raises(ShapeError):
            LocalOperator.identity(2).matmul(LocalOperator.identity(3))

    @pytest.mark.parametrize("n,N,sites", [(2, 3, (3, 1)), (3, 3, (2, 3)), (2, 4, (4,)), (3, 2, (1, 2))])
    def test_apply_matches_kronecker_embedding(self, rng, n, N, sites):
        shape = SpaceShape(n, N)
        op = random_operator(rng, n, len(sites))
        state = random_state(rng, shape)
        dense = embed_dense(op, sites, shape)
        assert np.allclose(apply_local(op, sites, state).amplitudes, dense @ state.amplitudes,
                           atol=1e-12)

    def test_input_state_unmodified(self, rng):
        shape = SpaceShape(2, 3)
        state = random_state(rng, shape)
        before = state.amplitudes.copy()
        apply_local(random_operator(rng, 2, 2), (1, 3), state)
        assert np.array_equal(state.amplitudes, before)

    @pytest.mark.parametrize("sites", [(1, 1), (0, 2), (1, 4)])
    def test_invalid_sites(self, rng, sites):
        with pytest.raises(ShapeError):
            apply_local(random_operator(rng, 2, 2), sites, StateVector.zeros(SpaceShape(2, 3)))

    def test_arity_mismatch(self, rng):
        with pytest.raises(ShapeError):
            apply_local(random_operator(rng, 2, 2), (1,), StateVector.zeros(SpaceShape(2, 3)))

    def test_local_dimension_mismatch(self, rng):
        with pytest.raises(ShapeError):
            apply_local(random_operator(rng, 3, 1), (1,), StateVector.zeros(SpaceShape(2, 3)))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), alpha=st.complex_numbers(max_magnitude=10,
                                                                    allow_nan=False))
    def test_linearity(self, seed, alpha):
        rng = np.random.default_rng(seed)
        shape = SpaceShape(2, 3)
        op = random_operator(rng, 2, 2)
        a, b = random_state(rng, shape), random_state(rng, shape)
        lhs = apply_local(op, (2, 3), a + b.scaled(alpha)).amplitudes
        rhs = apply_local(op, (2, 3), a).amplitudes + alpha * apply_local(op, (2, 3), b).amplitudes
        assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, abs(alpha)))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_disjoint_supports_commute(self, seed):
        rng = np.random.default_rng(seed)
        shape = SpaceShape(2, 4)
        op1, op2 = random_operator(rng, 2, 2), random_operator(rng, 2, 2)
        state = random_state(rng, shape)
        first = apply_local(op2, (2, 4), apply_local(op1, (3, 1), state))
        second = apply_local(op1, (3, 1), apply_local(op2, (2, 4), state))
        assert np.allclose(first.amplitudes, second.amplitudes, atol=1e-10)


class TestMaterialize:
    """Tests for dense materialization of operator products."""

    def test_rightmost_factor_acts_first(self, rng):
        shape = SpaceShape(2, 2)
        a, b = random_operator(rng, 2, 1), random_operator(rng, 2, 1)
        dense = materialize([(a, (1,)), (b, (1,))], shape)
        expected = embed_dense(a, (1,), shape) @ embed_dense(b, (1,), shape)
        assert np.allclose(dense, expected, atol=1e-12)

    def test_cap(self):
        shape = SpaceShape(2, 13)
        assert shape.dim > MATERIALIZE_CAP
        with pytest.raises(ShapeError, match="capped"):
            materialize([], shape)
