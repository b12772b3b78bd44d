"""Configuration management for explosive-ar."""

import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .models import ExperimentConfig, HSpec, ModelSpec, NoiseFamily, NoiseSpec, Statistic

# Global config directory
CONFIG_DIR = Path.home() / ".explosive_ar"
CONFIG_FILE = CONFIG_DIR / "config.json"
ENV_PREFIX = "EXPAR_"


def _coerce(name: str, kind: Any, value: Any) -> Any:
    if isinstance(value, bool):
        raise ValueError(f"{name} must be numeric")
    if kind in (int, "int"):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{name} must be an integer")
        return int(value)
    return float(value)


@dataclass
class Settings:
    """Numerical defaults shared by the library and the CLI."""
    horizon_cap: int = 1_000_000
    default_tol: float = 1e-12
    boundary_tol: float = 1e-9
    series_cap: int = 1_000_000
    ks_coefficient: float = 1.63
    tol_cov_rel: float = 0.10
    failure_budget: float = 0.01
    h_mc_draws: int = 1_000_000
    saturation_norm: float = 1e300

    @classmethod
    def load(cls, config_file: Optional[Path] = None) -> "Settings":
        """Load settings from disk, then apply EXPAR_* environment overrides."""
        data: dict[str, Any] = {}
        config_file = config_file or CONFIG_FILE
        if config_file.exists():
            try:
                raw_file = json.loads(config_file.read_text())
                data = {
                    f.name: _coerce(f.name, f.type, raw_file[f.name]) for f in fields(cls) if f.name in raw_file
                }
                cls(**raw_file)
            except (json.JSONDecodeError, TypeError, ValueError):
                data = {}

        for f in fields(cls):
            raw = os.environ.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            try:
                data[f.name] = _coerce(f.name, f.type, raw)
            except ValueError:
                raise ConfigError(f"{ENV_PREFIX}{f.name.upper()} must be numeric, got {raw!r}")
        return cls(**data)


def parse_theta(text: str) -> list[float]:
    """Parse a comma separated coefficient list such as ``"0,4"``."""
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float(p) for p in parts if p]
    except ValueError:
        raise ConfigError(f"Invalid theta {text!r}: expected comma separated numbers")
    if not values:
        raise ConfigError("theta must contain at least one coefficient")
    return values


class RunConfig(BaseModel):
    """Effective configuration of one CLI run (file values overridden by flags)."""
    model_config = ConfigDict(extra="forbid")

    # model
    theta: Optional[list[float]] = None
    sigma2: float = Field(default=1.0, gt=0)
    noise: NoiseFamily = "gaussian"
    df: Optional[float] = None

    # run
    n: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    tol: Optional[float] = Field(default=None, gt=0)

    # experiment
    statistic: Statistic = "mean_clt_y"
    replications: int = Field(default=2000, ge=1)
    base_seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    h: Optional[HSpec] = None
    tol_cov_rel: Optional[float] = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)

    # output
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @model_validator(mode="after")
    def _check_theta(self) -> "RunConfig":
        if self.theta is not None and len(self.theta) == 0:
            raise ValueError("theta must contain at least one coefficient")
        return self

    def model_spec(self) -> ModelSpec:
        if self.theta is None:
            raise ConfigError("theta is required (use --theta or set it in the config file)")
        return ModelSpec(
            theta=self.theta,
            noise=NoiseSpec(family=self.noise, sigma2=self.sigma2, df=self.df),
        )

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("A seed is required: pass --seed or set seed in the config file")
        return self.seed

    def require_n(self) -> int:
        if self.n is None:
            raise ConfigError("Path length n is required (use --n or set n in the config file)")
        return self.n

    def experiment_seed(self) -> int:
        seed = self.base_seed if self.base_seed is not None else self.seed
        if seed is None:
            raise ConfigError("A base seed is required: pass --seed or set base_seed")
        return seed

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            spec=self.model_spec(),
            n=self.require_n(),
            replications=self.replications,
            base_seed=self.experiment_seed(),
            statistic=self.statistic,
            h=self.h,
            tol_cov_rel=self.tol_cov_rel,
            workers=self.workers,
            tol=self.tol,
        )

    def out_dir(self) -> Path:
        return Path(self.out) if self.out else Path.cwd()

    def echo(self) -> dict:
        """The effective configuration as written into outputs."""
        return self.model_dump(mode="json", exclude_none=True)


# Config file sections are flattened onto RunConfig fields
_SECTIONS = ("model", "run", "experiment", "output")


def _read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot parse {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a table/object at the top level")

    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS and isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def load_run_config(config_path: Optional[Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """
    Build the effective run configuration.

    Args:
        config_path: Optional TOML or JSON file
        overrides: Flag values; ``None`` entries are ignored so file values survive

    Returns:
        Validated RunConfig
    """
    data = _read_config_file(config_path) if config_path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    if isinstance(data.get("theta"), str):
        data["theta"] = parse_theta(data["theta"])

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}")
