"""Tests for the qkz.algebra.nested module."""

import numpy as np
import pytest

from qkz.algebra.bethe import anchor_parameter, anchored_spec, bethe_vector
from qkz.algebra.nested import (
    NestedSpec,
    anchored_nested_spec,
    level_weight,
    nested_bethe_vector,
    nested_difference_report,
    nested_highest_weight_residual,
    nested_weight_of,
)
from qkz.algebra.rmatrix import QParams
from qkz.algebra.symmetry import Weight, support_grades
from qkz.algebra.tensorspace import SpaceShape, StateVector
from qkz.errors import GradingError, ShapeError


class TestLevelWeight:
    """Weights fixed by the level sizes."""

    @pytest.mark.parametrize("sizes,weight", [
        ((3, 1, 0), (2, 1, 0)),
        ((2, 1), (1, 1)),
        ((4, 2, 1), (2, 1, 1)),
        ((3, 0, 0), (3, 0, 0)),
    ])
    def test_values(self, sizes, weight):
        assert level_weight(sizes) == weight


class TestNestedSpec:
    """Validation of nested inputs."""

    def test_non_dominant_levels(self, params3, x3):
        with pytest.raises(ValueError, match="dominant"):
            NestedSpec(3, (3, 1, 1), x3, (0.1,), ((1,),), params3)

    def test_increasing_levels(self, params3, x3):
        with pytest.raises(ValueError):
            NestedSpec(3, (3, 1, 2), x3, (0.1,), ((1, 1),), params3)

    def test_rank_limit(self):
        params = QParams(q=0.7, n=5)
        with pytest.raises(ShapeError):
            NestedSpec(5, (1, 0, 0, 0, 0), (0.1,), (), ((), (), ()), params)

    def test_rank_matches_params(self, params, x3):
        with pytest.raises(ShapeError):
            NestedSpec(3, (3, 1, 0), x3, (0.1,), ((),), params)

    def test_top_base_count(self, params3, x3):
        with pytest.raises(ShapeError):
            NestedSpec(3, (3, 1, 0), x3, (0.1, 0.2), ((),), params3)

    def test_top_bases_apart_modulo_kappa(self, x4):
        params = QParams(q=0.7, n=3)
        with pytest.raises(ValueError, match="coincide"):
            NestedSpec(3, (4, 2, 1), x4, (0.1, 0.1 + params.kappa), ((1,),), params)

    def test_inner_anchor_range(self, x4):
        params = QParams(q=0.7, n=3)
        with pytest.raises(ShapeError):
            NestedSpec(3, (4, 2, 1), x4, (0.1, 0.3), ((3,),), params)

    def test_inner_anchor_count(self, x4):
        params = QParams(q=0.7, n=3)
        with pytest.raises(ShapeError):
            NestedSpec(3, (4, 2, 1), x4, (0.1, 0.3), ((),), params)

    def test_site_count(self, params3, x2):
        with pytest.raises(ShapeError):
            NestedSpec(3, (3, 1, 0), x2, (0.1,), ((),), params3)

    def test_level_policies_count(self, params3, x3, policy):
        with pytest.raises(ShapeError):
            NestedSpec(3, (3, 1, 0), x3, (0.1,), ((),), params3, level_policies=(policy,))

    def test_anchored_properties(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        assert spec.weight == Weight((2, 1, 0))
        assert spec.shape == SpaceShape(3, 3)
        assert spec.u_base == (anchor_parameter(x3[1], params3),)
        assert spec.inner_anchors == ((),)


# =============================================================================
# NESTED VECTORS
# =============================================================================


class TestNestedVector:
    """Tests for nested Bethe vectors."""

    def test_rank_two_reduces_to_bethe_vector(self, params, x2):
        plain = bethe_vector(anchored_spec(x2, [1], params))
        nested = nested_bethe_vector(anchored_nested_spec(x2, (2, 1), [1], [], params))
        assert np.allclose(plain.state.amplitudes, nested.state.amplitudes, rtol=1e-13, atol=0)

    def test_no_top_parameters_gives_reference_state(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 0, 0), [], [[]], params3)
        result = nested_bethe_vector(spec)
        assert result.converged
        assert result.state.amplitudes[0] == 1
        assert np.count_nonzero(result.state.amplitudes) == 1

    def test_rank_three_weight_and_grading(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        f = nested_bethe_vector(spec).state
        assert nested_weight_of(f, spec) == Weight((2, 1, 0))
        assert support_grades(f) == [(2, 1, 0)]

    def test_rank_three_highest_weight(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        f = nested_bethe_vector(spec).state
        assert nested_highest_weight_residual(f, spec) < 1e-8

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_rank_three_difference_equation(self, params3, x3, i):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        report = nested_difference_report(spec, i)
        assert report.converged
        assert report.residual < 1e-6

    def test_weight_mismatch(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        wrong = StateVector.basis(spec.shape, (1, 1, 1))
        with pytest.raises(GradingError):
            nested_weight_of(wrong, spec)

    def test_site_range(self, params3, x3):
        spec = anchored_nested_spec(x3, (3, 1, 0), [2], [[]], params3)
        with pytest.raises(ShapeError):
            nested_difference_report(spec, 4)


class TestTwoLevelNesting:
    """Level sizes (4, 2, 1): two top roots carrying one inner root."""

    @pytest.fixture
    def spec(self, x4):
        return anchored_nested_spec(x4, (4, 2, 1), [2, 4], [[1]], QParams(q=0.7, n=3))

    @pytest.mark.slow
    def test_weight_and_grading(self, spec):
        f = nested_bethe_vector(spec).state
        assert nested_weight_of(f, spec) == Weight((2, 1, 1))
        assert support_grades(f) == [(2, 1, 1)]

    @pytest.mark.slow
    def test_highest_weight(self, spec):
        f = nested_bethe_vector(spec).state
        assert nested_highest_weight_residual(f, spec) < 1e-8

    @pytest.mark.slow
    @pytest.mark.parametrize("i", [1, 2])
    def test_difference_equation(self, spec, i):
        report = nested_difference_report(spec, i)
        assert report.converged
        assert report.residual <= 1e-4
