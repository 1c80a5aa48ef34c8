"""Configuration management for wickcalc."""

import os
from pathlib import Path
from typing import Any

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ErrorCode, WickCalcError
from .models import MODEL_ALIASES, MODEL_NAMES


class ModelParams(BaseModel):
    """Physical parameters of a model; unset values take the model defaults."""

    model_config = ConfigDict(populate_by_name=True)

    hbar: float | None = Field(default=None, gt=0)
    N: int | None = Field(default=None, ge=0)
    a: float | None = Field(default=None)
    a1: float | None = Field(default=None)
    a2: float | None = Field(default=None)
    lam: float | None = Field(default=None, alias="lambda")

    def as_kwargs(self) -> dict[str, Any]:
        return {key: value for key, value in self.model_dump().items() if value is not None}


class KernelConfig(BaseModel):
    """Series truncation for kernels and representation spaces."""

    truncation: int = Field(ge=8, le=4096, default=256)
    ratio_window: int = Field(ge=2, le=256, default=16)
    dim: int = Field(ge=2, le=512, default=64)
    strip_modes: int = Field(ge=2, le=256, default=24)
    margin: int = Field(ge=0, le=64, default=4)
    t_max: float = Field(gt=0, default=64.0)


class GridConfig(BaseModel):
    """Quadrature resolution per chart."""

    sphere_polar: int = Field(ge=8, default=96)
    sphere_azimuth: int = Field(ge=8, default=96)
    disk_radial: int = Field(ge=8, default=128)
    disk_azimuth: int = Field(ge=8, default=96)
    plane_radial: int = Field(ge=8, default=128)
    plane_azimuth: int = Field(ge=8, default=96)
    # None sizes the plane window from hbar.
    plane_sqrt_radius: float | None = Field(gt=0, default=None)
    half_line_axis: int = Field(ge=8, default=128)
    half_line_azimuth: int = Field(ge=8, default=96)
    half_line_log_radius: float = Field(gt=0, default=32.0)
    strip_axis: int = Field(ge=8, default=192)
    strip_period: int = Field(ge=8, default=96)
    strip_window: float = Field(gt=0, default=16.0)


class ToleranceConfig(BaseModel):
    """Pass thresholds."""

    relation: float = Field(gt=0, default=1e-10)
    casimir: float = Field(gt=0, default=1e-12)
    integer: float = Field(gt=0, default=1e-9)
    root: float = Field(gt=0, default=1e-12)
    normalization: float = Field(gt=0, default=1e-8)
    route: float = Field(gt=0, default=1e-7)
    expansion_slope: float = Field(gt=0, default=2.7)


class TunnelingConfig(BaseModel):
    """Parameters of the exponentially-small-remainder checks."""

    hbars: list[float] = Field(default_factory=lambda: [0.6, 0.8, 1.0, 1.25, 1.5])
    slope_tolerance: float = Field(gt=0, le=1, default=0.02)
    remainder_hbars: list[float] = Field(default_factory=lambda: [0.6, 0.8, 1.0, 1.25, 1.5])
    remainder_tolerance: float = Field(gt=0, le=1, default=0.05)
    min_hbar: float = Field(gt=0, default=0.45)

    @field_validator("hbars", "remainder_hbars")
    @classmethod
    def _positive_sorted(cls, value: list[float]) -> list[float]:
        if len(value) < 3 or any(h <= 0 for h in value):
            raise ValueError("need at least three positive hbar values")
        return sorted(value)


class ScenarioConfig(BaseModel):
    """Main wickcalc configuration (one scenario)."""

    log_level: str = Field(default="INFO", pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    log_file: str | None = Field(default=None)
    model: str = Field(default="su2-sphere")
    params: ModelParams = Field(default_factory=ModelParams)
    suite: str | None = Field(default=None)
    checks: list[str] = Field(default_factory=list)
    output_directory: str = Field(default="wickcalc-out")
    export_operators: bool = Field(default=True)
    jobs: int = Field(ge=1, le=64, default=1)
    seed: int = Field(ge=0, default=1234)

    kernel: KernelConfig = Field(default_factory=KernelConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    tunneling: TunnelingConfig = Field(default_factory=TunnelingConfig)

    @field_validator("model")
    @classmethod
    def _known_model(cls, value: str) -> str:
        name = MODEL_ALIASES.get(value, value)
        if name not in MODEL_NAMES:
            raise ValueError(
                f"unknown model '{value}'; registered models: {', '.join(MODEL_NAMES)}"
            )
        return name

    def model_post_init(self, __context: Any) -> None:
        """Apply environment overrides."""
        jobs = os.environ.get("WICKCALC_JOBS")
        if jobs and "jobs" not in self.model_fields_set:
            try:
                self.jobs = max(1, int(jobs))
            except ValueError:
                logger.warning(f"Ignoring non-integer WICKCALC_JOBS={jobs!r}")
        level = os.environ.get("WICKCALC_LOG_LEVEL")
        if level and "log_level" not in self.model_fields_set:
            self.log_level = level.upper()


def load_config(path: str | Path | None = None) -> ScenarioConfig:
    """Load configuration from a YAML file or return the default ScenarioConfig."""
    if path is None:
        logger.info("No config path provided, using default ScenarioConfig.")
        return ScenarioConfig()

    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Failed to load config from {path}: {e}")
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"cannot read {path}: {e}") from e

    if not isinstance(data, dict):
        raise WickCalcError(ErrorCode.CONFIG_INVALID, f"{path} must contain a mapping")
    try:
        return ScenarioConfig(**data)
    except ValidationError as e:
        unknown_model = any(err.get("loc") == ("model",) for err in e.errors())
        code = ErrorCode.UNKNOWN_MODEL if unknown_model else ErrorCode.CONFIG_INVALID
        logger.error(f"Invalid config {path}: {e}")
        raise WickCalcError(code, str(e), path=str(path)) from e
