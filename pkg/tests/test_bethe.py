"""Tests for the qkz.algebra.bethe module."""

import numpy as np
import pytest

from qkz.algebra.bethe import (
    BetheSpec,
    _diverging,
    anchor_parameter,
    anchored_spec,
    bethe_term,
    bethe_vector,
    difference_report,
    difference_residual,
    lattice_sum,
    shell_points,
    unwanted_telescoping,
)
from qkz.algebra.qfunctions import TruncationPolicy, tau_twisted
from qkz.algebra.rmatrix import QParams
from qkz.algebra.symmetry import (
    color_weight_of,
    generators,
    highest_weight_residual,
    support_grades,
)
from qkz.algebra.tensorspace import SpaceShape
from qkz.errors import ConvergenceError, NullVectorError, ShapeError
from qkz.execution import ParallelExecutor


class TestBetheSpec:
    """Validation of Bethe vector inputs."""

    def test_rank_two_only(self, params3, x2):
        with pytest.raises(ShapeError):
            BetheSpec(x2, (), params3)

    def test_needs_a_site(self, params):
        with pytest.raises(ShapeError):
            BetheSpec((), (), params)

    def test_window_enforced(self, x2):
        with pytest.raises(ValueError, match="allow_outside_window"):
            BetheSpec(x2, (), QParams(q=0.3))

    def test_window_can_be_lifted(self, x2):
        spec = BetheSpec(x2, (), QParams(q=0.3), allow_outside_window=True)
        assert spec.m == 0

    def test_bases_coinciding_modulo_lattice(self, params, x2):
        with pytest.raises(ValueError, match="coincide"):
            BetheSpec(x2, (0.1, 0.1 + params.kappa), params)

    def test_anchor_range(self, params, x2):
        with pytest.raises(ShapeError):
            anchored_spec(x2, [3], params)

    def test_anchored_bases(self, params, x3):
        spec = anchored_spec(x3, [2, 3], params)
        assert spec.u_base == (anchor_parameter(x3[1], params), anchor_parameter(x3[2], params))
        assert spec.N == 3 and spec.m == 2

    def test_shifted_moves_one_site(self, params, x2):
        spec = anchored_spec(x2, [1], params).shifted(2)
        assert np.isclose(spec.x[1], x2[1] + params.kappa)
        assert spec.x[0] == x2[0]
        assert spec.u_base == (anchor_parameter(x2[0], params),)


# =============================================================================
# LATTICE SUMS
# =============================================================================


class TestShells:
    """Tests for shell enumeration and the divergence guard."""

    def test_shell_zero(self):
        assert list(shell_points(2, 0)) == [(0, 0)]

    def test_shell_sizes(self):
        assert len(list(shell_points(2, 1))) == 8
        assert len(list(shell_points(1, 3))) == 2
        assert len(list(shell_points(3, 1))) == 26

    def test_lexicographic_order(self):
        points = list(shell_points(2, 1))
        assert points == sorted(points)

    def test_divergence_guard(self):
        assert _diverging([1, 1, 1, 2, 3, 4])
        assert not _diverging([1, 1, 1, 2, 3])
        assert not _diverging([1, 1, 4, 3, 2, 1])


class TestLatticeSum:
    """Shell-by-shell summation with synthetic terms."""

    def test_convergent_sum(self):
        shape = SpaceShape(2, 1)
        result = lattice_sum(1, shape, lambda p: np.full(2, np.exp(-p[0] ** 2), dtype=complex),
                             TruncationPolicy())
        assert result.converged
        assert result.shells_used == 6
        assert result.terms_used == 13
        expected = 1 + 2 * sum(np.exp(-k**2) for k in range(1, 7))
        assert np.allclose(result.state.amplitudes, expected, rtol=1e-15)

    def test_divergent_sum_raises(self):
        shape = SpaceShape(2, 1)
        with pytest.raises(ConvergenceError, match="level 3") as exc:
            lattice_sum(1, shape, lambda p: np.full(2, np.exp(p[0] ** 2), dtype=complex),
                        TruncationPolicy(), level=3)
        assert len(exc.value.deltas) == 6
        assert exc.value.level == 3

    def test_shell_cap_without_convergence(self, caplog):
        shape = SpaceShape(2, 1)
        policy = TruncationPolicy(max_shell=3)
        with caplog.at_level("WARNING", logger="qkz"):
            result = lattice_sum(1, shape, lambda p: np.ones(2, dtype=complex), policy)
        assert not result.converged
        assert result.shells_used == 3
        assert "not converged" in caplog.text

    def test_term_errors_propagate_through_executor(self):
        def term(point):
            if point[0] == 1:
                raise ValueError("bad term")
            return np.zeros(2, dtype=complex)

        with ParallelExecutor(max_workers=2) as executor:
            with pytest.raises(ValueError, match="bad term"):
                lattice_sum(1, SpaceShape(2, 1), term, TruncationPolicy(), executor)


# =============================================================================
# BETHE VECTORS
# =============================================================================


class TestBetheVector:
    """Tests for Bethe vectors and their difference equation."""

    def test_no_particles_gives_reference_state(self, params, x2):
        result = bethe_vector(anchored_spec(x2, [], params))
        assert result.converged
        assert np.array_equal(result.state.amplitudes, [1, 0, 0, 0])

    def test_term_vanishes_below_the_anchor(self, params, x2):
        u = anchor_parameter(x2[0], params) - params.kappa
        term = bethe_term(x2, (u,), params)
        assert term.shape == SpaceShape(2, 2)
        assert term.norm() == 0

    @pytest.mark.parametrize("x", [(-0.42, 0.37), (-0.61, 0.08, 0.55)])
    def test_reference_state_is_fixed(self, params, x):
        spec = anchored_spec(x, [], params)
        for i in range(1, len(x) + 1):
            report = difference_report(spec, i)
            assert report.residual <= 1e-13

    @pytest.mark.parametrize("i", [1, 2])
    def test_difference_equation_one_particle(self, params, x2, i):
        spec = anchored_spec(x2, [1], params)
        report = difference_report(spec, i)
        assert report.converged
        assert report.residual < 1e-6
        assert difference_residual(spec, i) == report.residual

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_difference_equation_three_sites(self, params, x3, i):
        report = difference_report(anchored_spec(x3, [2], params), i)
        assert report.converged
        assert report.residual < 1e-6

    @pytest.mark.parametrize("i", [1, 2, 3, 4])
    def test_difference_equation_two_particles(self, params, x4, i):
        report = difference_report(anchored_spec(x4, [2, 4], params), i)
        assert report.converged
        assert not report.vanishing
        assert report.residual < 1e-6

    def test_two_particle_weight_and_highest_weight(self, params, x4):
        result = bethe_vector(anchored_spec(x4, [2, 4], params))
        assert result.converged
        assert support_grades(result.state) == [(2, 2)]
        assert color_weight_of(result.state, params.q).omega == (2, 2)
        assert highest_weight_residual(result.state, generators(x4, params)) < 1e-9

    def test_more_particles_than_half_the_sites_vanish(self, params, x3):
        spec = anchored_spec(x3, [1, 2], params)
        assert spec.vanishing_expected
        result = bethe_vector(spec)
        assert result.converged
        assert result.vanishes
        report = difference_report(spec, 1, allow_vanishing=True)
        assert report.vanishing
        assert report.mass_residual < 1e-6
        with pytest.raises(NullVectorError):
            difference_report(spec, 1)

    def test_swapped_anchors_differ_by_pair_factor(self, params, x4):
        spec = anchored_spec(x4, [2, 4], params)
        u1, u2 = spec.u_base
        f = bethe_vector(spec).state.amplitudes
        swapped = bethe_vector(anchored_spec(x4, [4, 2], params)).state.amplitudes
        factor = tau_twisted(u2 - u1, params) / tau_twisted(u1 - u2, params)
        assert np.linalg.norm(swapped - factor * f) < 1e-8 * np.linalg.norm(f)

    def test_generic_base_does_not_converge(self, params, x2):
        spec = BetheSpec(x2, (0.25,), params, TruncationPolicy(max_shell=12))
        result = bethe_vector(spec)
        assert not result.converged

    def test_site_range(self, params, x2):
        with pytest.raises(ShapeError):
            difference_report(anchored_spec(x2, [1], params), 3)

    def test_single_grade(self, params, x3):
        result = bethe_vector(anchored_spec(x3, [1], params))
        assert not result.is_null
        assert support_grades(result.state) == [(2, 1)]
        assert color_weight_of(result.state, params.q).omega == (2, 1)

    def test_executor_matches_sequential(self, params, x2):
        spec = anchored_spec(x2, [1], params)
        sequential = bethe_vector(spec)
        with ParallelExecutor(max_workers=3) as executor:
            parallel = bethe_vector(spec, executor)
        assert parallel.shells_used == sequential.shells_used
        assert np.allclose(parallel.state.amplitudes, sequential.state.amplitudes,
                           rtol=1e-14, atol=0)


class TestUnwantedTelescoping:
    """Telescoping of unwanted coefficients."""

    @pytest.mark.parametrize("i", [1, 2])
    def test_neighbouring_levels_cancel(self, params, x2, i):
        report = unwanted_telescoping(anchored_spec(x2, [1], params), i)
        assert report.worst_ratio_error < 1e-8
        assert report.relative_partial_sum < 1e-6
        assert len(report.levels) == 51

    def test_anchored_line_has_no_lower_boundary(self, params, x2):
        report = unwanted_telescoping(anchored_spec(x2, [1], params), 2)
        assert report.left[0] == 0
        assert report.relative_boundary < 1e-12

    def test_partial_sum_is_boundary_term(self, params, x2):
        report = unwanted_telescoping(anchored_spec(x2, [1], params), 2)
        assert abs(report.partial_sums[-1] - report.boundary) <= 1e-8 * report.max_term

    def test_generic_base_keeps_a_boundary(self, params, x2):
        spec = BetheSpec(x2, (0.25,), params)
        short = unwanted_telescoping(spec, 1, shell_cap=10)
        long = unwanted_telescoping(spec, 1, shell_cap=20)
        assert short.relative_boundary > 1e-2
        assert long.relative_boundary > 1e-2
        assert abs(long.boundary) > 0.5 * abs(short.boundary)

    def test_no_particles(self, params, x2):
        assert unwanted_telescoping(anchored_spec(x2, [], params), 1) is None

    def test_site_range(self, params, x2):
        with pytest.raises(ShapeError):
            unwanted_telescoping(anchored_spec(x2, [1], params), 3)
