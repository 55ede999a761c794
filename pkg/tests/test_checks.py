"""Tests for the qkz.checks package: checks and the suite runner."""

import json
import math
from pathlib import Path

import pytest

from qkz.checks import CHECKS, CheckReport, Outcome, YangBaxterCheck, run_suite
from qkz.checks.algebra_checks import draw_inhomogeneities
from qkz.checks.base import FAILURE_THRESHOLD
from qkz.checks.runner import EXIT_FAILED, EXIT_OK, build_tasks
from qkz.config import DEFAULT_CHECKS
from qkz.errors import ConfigError


def config_for(small_config, *checks, **overrides):
    return small_config.with_overrides(checks=list(checks), **overrides)


class TestVerdict:
    """Tests for the pass/fail rule."""

    def test_residuals_within_tolerance(self):
        assert CheckReport.verdict({"a": 1e-12, "b": 1e-11}, 1e-10, {})

    def test_residual_above_tolerance(self):
        assert not CheckReport.verdict({"a": 1e-9}, 1e-10, {})

    def test_non_finite_residual_fails(self):
        assert not CheckReport.verdict({"a": math.nan}, 1e-10, {})
        assert not CheckReport.verdict({"a": math.inf}, 1e-10, {})

    def test_expected_failures_must_fail(self):
        assert CheckReport.verdict({}, 1e-10, {"printed": 0.5})
        assert not CheckReport.verdict({}, 1e-10, {"printed": FAILURE_THRESHOLD / 2})

    def test_per_residual_tolerance(self):
        assert CheckReport.verdict({"loose": 1e-7, "tight": 1e-12}, 1e-10, {}, {"loose": 1e-6})


class TestCatalogue:
    """Tests for the check registry."""

    def test_names_match_registry(self, small_config):
        for name, cls in CHECKS.items():
            assert cls(small_config).name == name

    def test_default_checks_registered(self):
        assert set(DEFAULT_CHECKS) <= set(CHECKS)

    def test_cases_are_json_serialisable(self, small_config):
        for cls in CHECKS.values():
            check = cls(small_config)
            json.dumps(check.cases(check.rng()))

    def test_seeded_cases_are_reproducible(self, small_config):
        check = CHECKS["exchange"](small_config)
        assert check.cases(check.rng()) == check.cases(check.rng())

    def test_checks_draw_from_separate_streams(self, small_config):
        a = CHECKS["exchange"](small_config)
        b = CHECKS["vacuum"](small_config)
        assert a.rng().uniform() != b.rng().uniform()

    def test_inhomogeneity_gaps(self, rng):
        points = draw_inhomogeneities(rng, 4, min_gap=0.2)
        assert points == sorted(points)
        assert min(b - a for a, b in zip(points, points[1:])) >= 0.2


# =============================================================================
# CHECK INVOCATIONS
# =============================================================================


class TestChecksPass:
    """Each check passes on a small configuration."""

    @pytest.mark.parametrize("name", [
        "ybe", "exchange", "commutation", "vacuum", "scalar", "bethe", "unwanted",
        "highest-weight", "weights", "generators",
    ])
    def test_check_passes(self, small_config, name):
        check = CHECKS[name](small_config)
        for case in check.cases(check.rng()):
            report = check.execute(**case)
            assert report.error is None, report.error
            assert report.passed, report.residuals

    @pytest.mark.slow
    def test_nested_passes(self, small_config):
        check = CHECKS["nested"](small_config)
        reports = [check.execute(**case) for case in check.cases(check.rng())]
        assert all(r.error is None for r in reports)
        assert all(r.passed for r in reports)
        assert reports[1].observations["weight"] == [2, 1, 0]

    def test_commutation_sorts_expectations(self, small_config):
        check = CHECKS["commutation"](small_config)
        report = check.execute(**check.cases(check.rng())[0])
        assert set(report.expected_failures) == {"ab_printed", "db_printed", "dqb_printed"}
        assert {"bb", "bqb", "ab", "db", "aqb", "dqb"} <= set(report.residuals)
        assert {"db_corrected", "aqb_printed"} <= set(report.observations)

    def test_reference_state_gated_exactly(self, small_config):
        check = CHECKS["bethe"](small_config)
        m0 = next(c for c in check.cases(check.rng()) if c["anchors"] == [])
        report = check.execute(**m0)
        assert set(report.residuals) == {"site_1", "site_2"}
        assert report.tolerances == {"site_1": 1e-13, "site_2": 1e-13}
        assert report.passed

    def test_two_particles_gated(self, small_config):
        check = CHECKS["bethe"](config_for(small_config, "bethe", sites=[4], particles=[2]))
        (case,) = check.cases(check.rng())
        report = check.execute(**case)
        assert set(report.residuals) == {"site_1", "site_2", "site_3", "site_4"}
        assert report.passed, report.residuals

    @pytest.mark.slow
    def test_vanishing_vector_gated_by_mass(self, small_config):
        check = CHECKS["bethe"](config_for(small_config, "bethe", sites=[3], particles=[2]))
        (case,) = check.cases(check.rng())
        report = check.execute(**case)
        assert {"site_1_mass", "relative_norm"} <= set(report.residuals)
        assert report.passed, report.residuals

    @pytest.mark.slow
    def test_two_level_nesting_gated(self, small_config):
        config = config_for(small_config, "nested", levels=[[4, 2, 1]])
        check = CHECKS["nested"](config)
        report = check.execute(**check.cases(check.rng())[1])
        assert report.error is None, report.error
        assert {"difference", "highest_weight", "weight_mismatch"} <= set(report.residuals)
        assert report.tolerances["difference"] == 1e-4
        assert report.observations["weight"] == [2, 1, 1]
        assert report.passed, report.residuals

    def test_library_errors_become_failed_reports(self, small_config):
        check = CHECKS["bethe"](small_config)
        report = check.execute(x=[0.1, 0.5], anchors=[3])
        assert not report.passed
        assert report.error.startswith("ShapeError")
        assert report.residuals == {}


# =============================================================================
# SUITE RUNNER
# =============================================================================


class TestRunSuite:
    """Tests for run_suite."""

    def test_passing_suite(self, small_config):
        result = run_suite(small_config)
        assert result.exit_code == EXIT_OK
        assert result.passed
        lines = result.output.read_text().splitlines()
        assert len(lines) == len(result.reports) == 1
        assert json.loads(lines[0])["check"] == "ybe"

    def test_failing_check_sets_exit_code(self, small_config, mocker):
        mocker.patch.object(YangBaxterCheck, "evaluate",
                            return_value=Outcome(residuals={"ybe": 1.0}))
        result = run_suite(small_config)
        assert result.exit_code == EXIT_FAILED
        assert len(result.failures) == 1
        assert result.output.exists()

    def test_crash_becomes_report(self, small_config, mocker):
        mocker.patch.object(YangBaxterCheck, "evaluate", side_effect=RuntimeError("unexpected"))
        result = run_suite(small_config)
        assert result.exit_code == EXIT_FAILED
        assert result.reports[0].error == "RuntimeError: unexpected"

    def test_config_error_before_any_work(self, small_config):
        config = config_for(small_config)
        with pytest.raises(ConfigError):
            run_suite(config)
        assert not Path(config.output).exists()

    def test_reports_follow_submission_order(self, small_config):
        config = config_for(small_config, "vacuum", "ybe")
        result = run_suite(config, write=False)
        assert [r.check for r in result.reports] == ["vacuum", "vacuum", "ybe"]
        assert result.output is None

    def test_deterministic(self, small_config):
        config = config_for(small_config, "exchange")
        first = run_suite(config, write=False)
        second = run_suite(config, write=False)
        assert [r.residuals for r in first.reports] == [r.residuals for r in second.reports]
        assert [r.inputs for r in first.reports] == [r.inputs for r in second.reports]

    def test_worker_count_does_not_change_results(self, small_config):
        sequential = run_suite(config_for(small_config, "ybe", "vacuum", jobs=1), write=False)
        parallel = run_suite(config_for(small_config, "ybe", "vacuum", jobs=3), write=False)
        assert [r.check for r in sequential.reports] == [r.check for r in parallel.reports]
        assert [r.residuals for r in sequential.reports] == [r.residuals for r in parallel.reports]

    def test_lone_task_hands_pool_to_lattice_sums(self, small_config):
        config = config_for(small_config, "bethe", particles=[1], jobs=2)
        assert len(build_tasks(config)) == 1
        result = run_suite(config, write=False)
        assert result.passed
