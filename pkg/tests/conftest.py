"""Pytest fixtures and configuration for qkz tests."""

import numpy as np
import pytest

from qkz.algebra.qfunctions import TruncationPolicy
from qkz.algebra.rmatrix import QParams
from qkz.config import SuiteConfig


@pytest.fixture
def params():
    """Default deformation inside the validated window."""
    return QParams(q=0.7, kappa=1.6)


@pytest.fixture
def params3():
    """Rank-3 parameters with the default deformation."""
    return QParams(q=0.7, kappa=1.6, n=3)


@pytest.fixture
def policy():
    return TruncationPolicy()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def x2():
    """Two well-separated real inhomogeneities."""
    return (-0.42, 0.37)


@pytest.fixture
def x3():
    """Three well-separated real inhomogeneities."""
    return (-0.61, 0.08, 0.55)


@pytest.fixture
def x4():
    """Four real inhomogeneities for two-particle vectors."""
    return (0.1, -0.35, 0.42, -0.05)


@pytest.fixture
def small_config(tmp_path):
    """A suite config small enough for unit tests, writing into tmp_path."""
    return SuiteConfig.from_dict({
        "checks": ["ybe"],
        "draws": 2,
        "jobs": 1,
        "output": str(tmp_path / "report.jsonl"),
        "sizes": {"sites": [2], "particles": [0, 1], "rank": 2, "levels": [[3, 1, 0]]},
    })


@pytest.fixture(autouse=True)
def isolated_log_dir(tmp_path, monkeypatch):
    """Keep CLI log files out of the home directory."""
    monkeypatch.setenv("QKZ_LOG_DIR", str(tmp_path / "logs"))
