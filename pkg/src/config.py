"""Configuration loader module."""

import os
from pathlib import Path
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import DomainError


DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config" / "config.yaml"

# Documented but discouraged: loosening this hides genuine rank loss.
RANK_TOLERANCE_ENV = "BITOMO_TOLERANCE_RANK"


@dataclass
class Tolerances:
    """Numerical tolerances used by certificates and reconstruction."""
    rank: float = 1e-10
    idempotence: float = 1e-12
    hermitian: float = 1e-12
    psd: float = 1e-12
    round_trip: float = 1e-10
    consistency: float = 1e-8
    witness: float = 1e-12
    coincidence: float = 1e-12

    def override(self, overrides: dict[str, float]) -> "Tolerances":
        """Return a copy with the named tolerances replaced."""
        values = dict(self.__dict__)
        for name, value in overrides.items():
            if name not in values:
                raise DomainError(f"unknown tolerance '{name}'")
            value = float(value)
            if not value > 0:
                raise DomainError(f"tolerance '{name}' must be positive, got {value}")
            values[name] = value
        return Tolerances(**values)


@dataclass
class RunSettings:
    """Defaults for a single CLI invocation."""
    seed: int = 0
    format: str = "json"


@dataclass
class ReportSettings:
    """Workload of the `report` subcommand."""
    real_pair_trials: int = 100
    real_triple_trials: int = 20
    complex_trials: int = 100
    workers: int = 1


@dataclass
class Config:
    """Main configuration class."""
    tolerances: Tolerances = field(default_factory=Tolerances)
    run: RunSettings = field(default_factory=RunSettings)
    report: ReportSettings = field(default_factory=ReportSettings)


@dataclass
class RunConfig:
    """A parsed CLI invocation: subcommand, its flags, and the shared settings."""
    subcommand: str
    flags: dict
    seed: int = 0
    format: str = "json"
    tolerances: Tolerances = field(default_factory=Tolerances)


def load_config(config_path: Optional[str] = None) -> Config:
    """Load configuration from a YAML file and environment variables.

    Args:
        config_path: Path to config YAML file. If None, uses the default
            location and falls back to built-in defaults when it is absent.

    Returns:
        Config object with all settings.
    """
    if config_path is None:
        path = DEFAULT_CONFIG_PATH
        data = _read_yaml(path) if path.exists() else {}
    else:
        data = _read_yaml(Path(config_path))

    tolerances = Tolerances().override(data.get("tolerances", {}) or {})

    run_data = data.get("run", {}) or {}
    run = RunSettings(
        seed=int(run_data.get("seed", 0)),
        format=run_data.get("format", "json"),
    )
    if run.seed < 0 or run.seed >= 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {run.seed}")
    if run.format not in ("json", "text"):
        raise DomainError(f"format must be 'json' or 'text', got '{run.format}'")

    report_data = data.get("report", {}) or {}
    report = ReportSettings(
        real_pair_trials=int(report_data.get("real_pair_trials", 100)),
        real_triple_trials=int(report_data.get("real_triple_trials", 20)),
        complex_trials=int(report_data.get("complex_trials", 100)),
        workers=max(1, int(report_data.get("workers", 1))),
    )

    # Environment overrides
    rank_env = os.environ.get(RANK_TOLERANCE_ENV)
    if rank_env:
        try:
            rank = float(rank_env)
        except ValueError as e:
            raise DomainError(f"{RANK_TOLERANCE_ENV} is not a number: {rank_env!r}") from e
        tolerances = tolerances.override({"rank": rank})

    return Config(tolerances=tolerances, run=run, report=report)


def _read_yaml(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise DomainError(f"config file {path} must contain a mapping")
    return data
