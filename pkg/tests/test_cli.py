"""Tests for the qkz command-line interface."""

import json

import pytest
from click.testing import CliRunner

from qkz import __version__
from qkz.checks import Outcome, YangBaxterCheck
from qkz.cli import main, setup_logging
from qkz.config import SuiteConfig


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def suite_file(tmp_path):
    path = tmp_path / "suite.toml"
    path.write_text(
        'checks = ["ybe", "generators"]\n'
        "draws = 2\njobs = 1\n"
        f'output = "{(tmp_path / "suite.jsonl").as_posix()}"\n\n'
        "[sizes]\nsites = [2]\n"
    )
    return path


class TestVerify:
    """Tests for `qkz verify`."""

    def test_passing_check(self, runner, tmp_path):
        out = tmp_path / "ybe.jsonl"
        result = runner.invoke(main, ["verify", "ybe", "--draws", "2", "--jobs", "1",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "1/1 passed" in result.output
        record = json.loads(out.read_text().splitlines()[0])
        assert record["check"] == "ybe"
        assert record["passed"] is True

    def test_flags_reach_the_report(self, runner, tmp_path):
        out = tmp_path / "ybe3.jsonl"
        result = runner.invoke(main, ["verify", "ybe", "--rank", "3", "--draws", "1",
                                      "--seed", "5", "--jobs", "1", "--out", str(out)])
        assert result.exit_code == 0, result.output
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert [r["inputs"]["n"] for r in records] == [2, 3]
        assert all(r["seed"] == 5 for r in records)

    def test_failing_check_exits_one(self, runner, tmp_path, mocker):
        mocker.patch.object(YangBaxterCheck, "evaluate",
                            return_value=Outcome(residuals={"ybe": 1.0}))
        result = runner.invoke(main, ["verify", "ybe", "--draws", "1", "--jobs", "1",
                                      "--out", str(tmp_path / "r.jsonl")])
        assert result.exit_code == 1
        assert "0/1 passed" in result.output

    def test_unknown_check_exits_two(self, runner, tmp_path):
        result = runner.invoke(main, ["verify", "nope", "--out", str(tmp_path / "r.jsonl")])
        assert result.exit_code == 2
        assert "Configuration error" in result.output
        assert not (tmp_path / "r.jsonl").exists()

    def test_non_dominant_levels_exit_two(self, runner, tmp_path):
        result = runner.invoke(main, ["verify", "nested", "--levels", "3,1,1",
                                      "--out", str(tmp_path / "r.jsonl")])
        assert result.exit_code == 2

    def test_malformed_list_flag(self, runner):
        result = runner.invoke(main, ["verify", "ybe", "--sites", "two"])
        assert result.exit_code == 2
        assert "comma-separated integers" in result.output


class TestSuite:
    """Tests for `qkz suite`."""

    def test_runs_configured_checks(self, runner, suite_file, tmp_path):
        result = runner.invoke(main, ["suite", "--config", str(suite_file)])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "suite.jsonl").read_text().splitlines()
        assert [json.loads(line)["check"] for line in lines] == ["ybe", "generators"]

    def test_flags_override_file(self, runner, suite_file, tmp_path):
        out = tmp_path / "override.jsonl"
        result = runner.invoke(main, ["suite", "--config", str(suite_file), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.exists()
        assert not (tmp_path / "suite.jsonl").exists()

    def test_missing_config_exits_two(self, runner, tmp_path):
        result = runner.invoke(main, ["suite", "--config", str(tmp_path / "missing.toml")])
        assert result.exit_code == 2

    def test_unknown_key_exits_two(self, runner, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("colour = 3\n")
        result = runner.invoke(main, ["suite", "--config", str(path)])
        assert result.exit_code == 2
        assert "colour" in result.output

    def test_group_config_error_exits_two(self, runner, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[params]\nbeta = 1.0\n")
        result = runner.invoke(main, ["--config", str(path), "checks"])
        assert result.exit_code == 2


class TestInformationCommands:
    """Tests for checks, schema, config-show and version."""

    def test_checks_lists_registry(self, runner):
        result = runner.invoke(main, ["checks"])
        assert result.exit_code == 0
        assert "ybe" in result.output
        assert "nested" in result.output

    def test_schema_path(self, runner):
        result = runner.invoke(main, ["schema"])
        assert result.exit_code == 0
        assert result.output.strip().endswith("report_schema.json")

    def test_config_show(self, runner, suite_file):
        result = runner.invoke(main, ["--config", str(suite_file), "config-show"])
        assert result.exit_code == 0
        assert "[sizes]" in result.output
        assert "generators" in result.output

    def test_version(self, runner):
        result = runner.invoke(main, ["version"])
        assert result.exit_code == 0
        assert f"qkz v{__version__}" in result.output


class TestLoggingSetup:
    """Tests for the CLI logging setup."""

    def test_invalid_logging_settings_fall_back_with_warning(self, small_config, tmp_path,
                                                             mocker, caplog):
        mocker.patch.object(SuiteConfig, "get_logging_config",
                            side_effect=ValueError("bad level"))
        mocker.patch("qkz.logging_config.DEFAULT_LOG_DIR", tmp_path / "default-logs")
        with caplog.at_level("WARNING", logger="qkz"):
            setup_logging(config=small_config)
        assert "using defaults" in caplog.text
        assert "bad level" in caplog.text
        assert (tmp_path / "default-logs").is_dir()
