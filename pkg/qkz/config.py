"""Configuration management for qkz suites."""

import os
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import toml

from .algebra.tensorspace import MATERIALIZE_CAP
from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240611
DEFAULT_CHECKS = ["ybe", "exchange", "commutation", "vacuum", "scalar", "bethe", "highest-weight"]


@dataclass
class ParamsSettings:
    """Deformation parameter and numerical guards."""
    q: float = 0.7
    kappa: float = 1.6
    pole_guard: float = 1e-8
    markov_exponent: int = 2  # -2 evaluates the printed Markov weights
    allow_outside_window: bool = False


@dataclass
class SizeSettings:
    """Chain lengths, particle numbers, rank and nested level sizes."""
    sites: List[int] = field(default_factory=lambda: [2, 3])
    particles: List[int] = field(default_factory=lambda: [0, 1])
    rank: int = 2
    levels: List[List[int]] = field(default_factory=lambda: [[3, 1, 0]])


@dataclass
class TruncationSettings:
    """Infinite products and lattice sums."""
    product_tol: float = 1e-16
    max_factors: int = 100000
    sum_tol: float = 1e-10
    max_shell: int = 40


@dataclass
class LoggingConfigSettings:
    """Configuration for logging system."""
    level: str = "INFO"  # DEBUG, INFO, WARNING, ERROR
    format: str = "standard"  # standard, json
    max_file_size_mb: int = 10
    backup_count: int = 5
    module_levels: Dict[str, str] = field(default_factory=dict)


_SECTIONS = {
    "params": ParamsSettings,
    "sizes": SizeSettings,
    "truncation": TruncationSettings,
    "logging": LoggingConfigSettings,
}
_TOP_LEVEL = {"seed", "checks", "output", "jobs", "draws"}


def _field_names(cls) -> set:
    return {f.name for f in fields(cls)}


def _section_for_key(key: str) -> Optional[str]:
    for name, cls in _SECTIONS.items():
        if name != "logging" and key in _field_names(cls):
            return name
    return None


@dataclass
class SuiteConfig:
    """Main configuration class for a verification suite."""

    params: ParamsSettings = field(default_factory=ParamsSettings)
    sizes: SizeSettings = field(default_factory=SizeSettings)
    truncation: TruncationSettings = field(default_factory=TruncationSettings)
    logging: LoggingConfigSettings = field(default_factory=LoggingConfigSettings)
    seed: int = DEFAULT_SEED
    checks: List[str] = field(default_factory=lambda: list(DEFAULT_CHECKS))
    output: str = "qkz-report.jsonl"
    jobs: int = 0  # 0 uses every available core
    draws: int = 20
    home_dir: Path = field(default_factory=lambda: Path.home() / ".qkz")

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> "SuiteConfig":
        """Load configuration from a TOML file, or the defaults when no path is given."""
        if config_path is None:
            return cls()
        config_path = Path(config_path)
        if not config_path.exists():
            raise ConfigError(f"configuration file {config_path} does not exist")
        logger.info(f"Loading configuration from {config_path}")
        try:
            data = toml.load(config_path)
        except (toml.TomlDecodeError, OSError) as e:
            raise ConfigError(f"cannot parse {config_path}: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SuiteConfig":
        """
        Create configuration from a dictionary.

        Section tables ([params], [sizes], [truncation], [logging]) and flat
        top-level keys such as `q = 0.7` or `sum_tol = 1e-8` are both accepted.
        """
        sections: Dict[str, Dict[str, Any]] = {name: {} for name in _SECTIONS}
        top: Dict[str, Any] = {}
        unknown: List[str] = []

        for key, value in data.items():
            if key in _SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigError(f"[{key}] must be a table", {"key": key})
                valid = _field_names(_SECTIONS[key])
                for sub_key, sub_value in value.items():
                    if sub_key in valid:
                        sections[key][sub_key] = sub_value
                    else:
                        unknown.append(f"{key}.{sub_key}")
            elif key in _TOP_LEVEL:
                top[key] = value
            else:
                section = _section_for_key(key)
                if section is None:
                    unknown.append(key)
                else:
                    sections[section][key] = value

        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}",
                              {"unknown": sorted(unknown)})

        if "levels" in sections["sizes"]:
            sections["sizes"]["levels"] = _normalise_levels(sections["sizes"]["levels"])
        try:
            return cls(
                params=ParamsSettings(**sections["params"]),
                sizes=SizeSettings(**sections["sizes"]),
                truncation=TruncationSettings(**sections["truncation"]),
                logging=LoggingConfigSettings(**sections["logging"]),
                **top,
            )
        except TypeError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "seed": self.seed,
            "checks": list(self.checks),
            "output": self.output,
            "jobs": self.jobs,
            "draws": self.draws,
            "params": {
                "q": self.params.q,
                "kappa": self.params.kappa,
                "pole_guard": self.params.pole_guard,
                "markov_exponent": self.params.markov_exponent,
                "allow_outside_window": self.params.allow_outside_window,
            },
            "sizes": {
                "sites": list(self.sizes.sites),
                "particles": list(self.sizes.particles),
                "rank": self.sizes.rank,
                "levels": [list(level) for level in self.sizes.levels],
            },
            "truncation": {
                "product_tol": self.truncation.product_tol,
                "max_factors": self.truncation.max_factors,
                "sum_tol": self.truncation.sum_tol,
                "max_shell": self.truncation.max_shell,
            },
            "logging": {
                "level": self.logging.level,
                "format": self.logging.format,
                "max_file_size_mb": self.logging.max_file_size_mb,
                "backup_count": self.logging.backup_count,
                "module_levels": dict(self.logging.module_levels),
            },
        }

    def save(self, config_path: Optional[Path] = None):
        """Save configuration to file."""
        if config_path is None:
            config_path = self.home_dir / "suite.toml"
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, "w") as f:
            toml.dump(self.to_dict(), f)

        logger.info(f"Configuration saved to {config_path}")

    def with_overrides(self, **flags: Any) -> "SuiteConfig":
        """
        Apply command-line values on top of this configuration.

        Keys are the CLI flag names (q, kappa, sites, particles, rank, levels, seed,
        sum_tol, max_shell, out, jobs, checks); None means the flag was not given.
        """
        params, sizes, truncation = self.params, self.sizes, self.truncation
        top: Dict[str, Any] = {}
        for key, value in flags.items():
            if value is None:
                continue
            if key in ("q", "kappa"):
                params = replace(params, **{key: value})
            elif key in ("sites", "particles", "rank"):
                sizes = replace(sizes, **{key: value})
            elif key == "levels":
                sizes = replace(sizes, levels=_normalise_levels(value))
            elif key in ("sum_tol", "max_shell"):
                truncation = replace(truncation, **{key: value})
            elif key == "out":
                top["output"] = str(value)
            elif key in ("seed", "jobs", "checks", "draws"):
                top[key] = value
            else:
                raise ConfigError(f"unknown override {key!r}")
        return replace(self, params=params, sizes=sizes, truncation=truncation, **top)

    def validate(self) -> "SuiteConfig":
        """Reject unknown checks and sizes beyond the module caps before any computation."""
        from .checks import CHECKS

        if not self.checks:
            raise ConfigError("no checks requested")
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}",
                              {"unknown": unknown, "known": sorted(CHECKS)})
        if self.params.q <= 0 or self.params.q == 1:
            raise ConfigError(f"q must be positive and different from 1, got {self.params.q}")
        if self.params.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.params.kappa}")
        if not 2 <= self.sizes.rank <= 4:
            raise ConfigError(f"rank must lie in 2..4, got {self.sizes.rank}")
        if not self.sizes.sites or any(n < 1 for n in self.sizes.sites):
            raise ConfigError(f"sites must be positive integers, got {self.sizes.sites}")
        widest = max(self.sizes.rank, 2) ** (max(self.sizes.sites) + 1)
        if widest > MATERIALIZE_CAP:
            raise ConfigError(
                f"rank {self.sizes.rank} with {max(self.sizes.sites)} sites exceeds the dense "
                f"block cap ({widest} > {MATERIALIZE_CAP})"
            )
        if any(m < 0 for m in self.sizes.particles):
            raise ConfigError(f"particle numbers must be non-negative, got {self.sizes.particles}")
        for level in self.sizes.levels:
            _check_levels(level)
        if self.truncation.sum_tol <= 0 or self.truncation.product_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.truncation.max_shell < 1 or self.truncation.max_factors < 1:
            raise ConfigError("max_shell and max_factors must be >= 1")
        if self.jobs < 0:
            raise ConfigError(f"jobs must be >= 0, got {self.jobs}")
        if self.draws < 1:
            raise ConfigError(f"draws must be >= 1, got {self.draws}")
        return self

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1

    def to_params(self, n: Optional[int] = None):
        from .algebra.rmatrix import QParams

        return QParams(
            q=self.params.q,
            kappa=self.params.kappa,
            n=n or self.sizes.rank,
            pole_guard=self.params.pole_guard,
            markov_exponent=self.params.markov_exponent,
        )

    def to_policy(self):
        from .algebra.qfunctions import TruncationPolicy

        return TruncationPolicy(
            product_tol=self.truncation.product_tol,
            max_factors=self.truncation.max_factors,
            sum_tol=self.truncation.sum_tol,
            max_shell=self.truncation.max_shell,
        )

    def get_logging_config(self):
        """Get logging configuration for setup_logging()."""
        from dotenv import load_dotenv

        from .logging_config import LoggingConfig

        env_path = Path.cwd() / ".env"
        if env_path.exists():
            load_dotenv(env_path)

        log_dir = os.getenv("QKZ_LOG_DIR")
        return LoggingConfig(
            level=os.getenv("QKZ_LOG_LEVEL") or self.logging.level,
            format=self.logging.format,
            log_dir=Path(log_dir) if log_dir else self.home_dir / "logs",
            max_file_size_mb=self.logging.max_file_size_mb,
            backup_count=self.logging.backup_count,
            module_levels=dict(self.logging.module_levels),
        )


def _normalise_levels(value: Any) -> List[List[int]]:
    """Accept one level list ([3, 1, 0]) or a list of them."""
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"levels must be a non-empty list, got {value!r}")
    if all(isinstance(v, int) for v in value):
        return [list(value)]
    if all(isinstance(v, (list, tuple)) for v in value):
        return [list(v) for v in value]
    raise ConfigError(f"levels must be a list of integers or of integer lists, got {value!r}")


def _check_levels(level: List[int]) -> None:
    from .algebra.nested import MAX_RANK, level_weight

    if not 2 <= len(level) <= MAX_RANK:
        raise ConfigError(f"level sizes {level} need between 2 and {MAX_RANK} entries")
    if any(a < b for a, b in zip(level, level[1:])) or min(level) < 0:
        raise ConfigError(f"level sizes {level} must be non-negative and non-increasing")
    omega = level_weight(level)
    if any(a < b for a, b in zip(omega, omega[1:])):
        raise ConfigError(f"level sizes {level} give the non-dominant weight {omega}",
                          {"levels": level, "weight": list(omega)})
    if len(level) ** (level[0] + 1) > MATERIALIZE_CAP:
        raise ConfigError(f"level sizes {level} exceed the dense block cap")
