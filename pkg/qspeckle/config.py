"""Run configuration: schema, loading, presets, and worker limits."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qspeckle.core import aliasing_limit_cm
from qspeckle.errors import ConfigError
from qspeckle.models import Grid1D
from qspeckle.propagation import PropagationMethodRegistry

logger = logging.getLogger(__name__)

THREADS_ENV = "QSPECKLE_THREADS"
SMALL_PRESET: dict[str, Any] = {"grid_n": 512, "pitch_um": 20.0, "realizations": 50}
OUTPUT_FORMATS = frozenset({"raw", "pgm"})
MIN_SIGMA0_PIXELS = 3.0
MAX_DEFAULT_WORKERS = 4


class RunConfig(BaseModel):
    """Validated parameters of a simulation run.

    Every length carries its unit in the key name. Unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda_nm: float = Field(810.0, gt=0)
    sigma0_um: float = Field(44.0, gt=0)
    sigma_minus_mm: float = Field(1.0, gt=0)
    sigma_plus_mm: float = Field(5.0, gt=0)
    grid_n: int = Field(2048, ge=64)
    pitch_um: float = Field(10.0, gt=0)
    z_list_cm: tuple[float, ...] = (1.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    realizations: int = Field(50, ge=1)
    seed: int = Field(0, ge=0)
    method: str = "angular_spectrum"
    blur_um: float = Field(200.0, gt=0)
    threshold: float = Field(0.7, gt=0, lt=1)
    flatten: Literal["ensemble", "blur"] = "ensemble"
    width_screens: int = Field(1, ge=1)
    phase_gain: float = Field(6.0, gt=0)
    gamma_half_window: int = Field(16, ge=0)
    pad: bool = False
    formats: tuple[str, ...] = ("raw", "pgm")
    frames_n: int = Field(50000, ge=2)
    frames_pairs: float = Field(5.0, ge=0)
    frames_dark_rate: float = Field(0.01, ge=0)
    frames_background_rate: float = Field(0.5, ge=0)
    frames_blur_px: float = Field(2.5, ge=0)
    frames_band: int = Field(15, ge=0)
    frames_symmetrize: bool = False
    frames_binning: int = Field(1, ge=1)
    frames_pixels: int = Field(128, ge=2)
    frames_z_cm: float | None = Field(None, ge=0)

    @field_validator("grid_n")
    @classmethod
    def _even_grid(cls, value: int) -> int:
        if value % 2:
            msg = f"grid_n must be even, got {value}"
            raise ValueError(msg)
        return value

    @field_validator("z_list_cm")
    @classmethod
    def _sorted_distances(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("z_list_cm must not be empty")
        if any(z < 0 for z in value):
            msg = f"z_list_cm must be non-negative, got {list(value)}"
            raise ValueError(msg)
        return tuple(sorted(value))

    @field_validator("method")
    @classmethod
    def _registered_method(cls, value: str) -> str:
        available = PropagationMethodRegistry.available()
        if value not in available:
            msg = f"Unknown method {value!r}. Available: {available}"
            raise ValueError(msg)
        return value

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        unknown = sorted(set(value) - OUTPUT_FORMATS)
        if unknown:
            msg = f"Unknown output formats {unknown}. Available: {sorted(OUTPUT_FORMATS)}"
            raise ValueError(msg)
        return value

    @model_validator(mode="after")
    def _frame_geometry(self) -> RunConfig:
        if self.grid_n % self.frames_pixels:
            msg = f"grid_n={self.grid_n} is not divisible by frames_pixels={self.frames_pixels}"
            raise ValueError(msg)
        if self.frames_pixels % self.frames_binning:
            msg = f"frames_pixels={self.frames_pixels} is not divisible by frames_binning={self.frames_binning}"
            raise ValueError(msg)
        return self

    @model_validator(mode="after")
    def _width_screens_in_ensemble(self) -> RunConfig:
        if self.width_screens > self.realizations:
            msg = f"width_screens={self.width_screens} exceeds realizations={self.realizations}"
            raise ValueError(msg)
        return self

    @property
    def frames_distance_cm(self) -> float:
        """Distance used by the frames pipeline; the farthest simulated distance by default.

        The farthest distance is the one closest to the far field, where the coincidence map
        is most structured.
        """
        return self.z_list_cm[-1] if self.frames_z_cm is None else self.frames_z_cm


def load_config(
    source: str | Path | dict[str, Any] | None = None, *, small: bool = False, seed: int | None = None
) -> RunConfig:
    """Load a run configuration from a YAML/JSON file, a dict, or defaults.

    Parameters
    ----------
    source : str | Path | dict | None
        A path to a YAML or JSON file, a raw dict, or ``None`` for defaults.
    small : bool
        Apply the CI-speed preset (``grid_n=512``, ``pitch_um=20``, 50 realizations). A
        ``sigma0_um`` under three pixels is raised to three pixels and distances beyond the
        preset aliasing bound are dropped.
    seed : int | None
        Overrides the configured master seed.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        If *source* is a path that does not exist or does not hold a mapping, or the small
        preset leaves no distance.
    pydantic.ValidationError
        If a value violates the schema.
    """
    raw: dict[str, Any] = {}
    if isinstance(source, dict):
        raw = dict(source)
    elif source is not None:
        path = Path(source)
        if not path.is_file():
            msg = f"Config file not found: {path}"
            raise ConfigError(msg)
        raw = _load_yaml(path)

    if small:
        _apply_small_preset(raw)
    if seed is not None:
        raw["seed"] = seed
    config = RunConfig(**raw)
    logger.debug(
        "Loaded config: grid %d x %.1f um, %d distances", config.grid_n, config.pitch_um, len(config.z_list_cm)
    )
    return config


def _apply_small_preset(raw: dict[str, Any]) -> None:
    """Overlay :data:`SMALL_PRESET` and keep the rest of *raw* consistent with its coarser grid."""
    raw.update(SMALL_PRESET)
    defaults = RunConfig.model_fields
    floor = MIN_SIGMA0_PIXELS * SMALL_PRESET["pitch_um"]
    sigma0 = float(raw.get("sigma0_um", defaults["sigma0_um"].default))
    if sigma0 < floor:
        logger.warning("Small preset raises sigma0_um from %.1f to %.1f um (3 pixels)", sigma0, floor)
        raw["sigma0_um"] = floor

    grid = Grid1D(SMALL_PRESET["grid_n"], SMALL_PRESET["pitch_um"])
    z_max = aliasing_limit_cm(grid, float(raw.get("lambda_nm", defaults["lambda_nm"].default)))
    distances = [float(z) for z in raw.get("z_list_cm", defaults["z_list_cm"].default)]
    kept = [z for z in distances if z <= z_max]
    if not kept:
        msg = f"No distance of {distances} fits the small preset's aliasing bound {z_max:.2f} cm"
        raise ConfigError(msg)
    if len(kept) < len(distances):
        logger.warning("Small preset drops distances beyond its aliasing bound %.2f cm", z_max)
        raw["z_list_cm"] = kept


def resolve_workers(default: int | None = None) -> int:
    """Worker count, capped by ``QSPECKLE_THREADS`` when set.

    Without an explicit *default* the CPU count is used, but at most
    ``MAX_DEFAULT_WORKERS`` unless the environment variable asks for more; each worker holds
    a full-size field.

    Raises
    ------
    ConfigError
        If the environment variable is not a positive integer.
    """
    cpus = default or os.cpu_count() or 1
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return cpus if default else min(cpus, MAX_DEFAULT_WORKERS)
    try:
        cap = int(value)
    except ValueError as exc:
        msg = f"{THREADS_ENV} must be a positive integer, got {value!r}"
        raise ConfigError(msg) from exc
    if cap < 1:
        msg = f"{THREADS_ENV} must be a positive integer, got {value!r}"
        raise ConfigError(msg)
    return min(cpus, cap)


def _load_yaml(path: Path) -> dict[str, Any]:
    """Load a YAML (or JSON) mapping using PyYAML."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        msg = f"Config file {path} must contain a mapping, got {type(data).__name__}"
        raise ConfigError(msg)
    return data
