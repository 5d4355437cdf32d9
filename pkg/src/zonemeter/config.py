"""Run configuration: one JSON document drives every pipeline stage."""

from __future__ import annotations

import json
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError, InputError
from .topology import AirProperties


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PathsConfig(_Model):
    data: str | None = None  # long-format readings CSV
    catalog: str | None = None  # point catalog CSV
    topology: str | None = None  # topology JSON
    commissioning: str | None = None  # fan test points CSV, optional
    models: str | None = None  # fitted models JSON (output of fit)
    out_dir: str = "out"


class AirConfig(_Model):
    c_kj_per_kg_k: float = Field(default=1.006, gt=0)
    rho_kg_per_m3: float = Field(default=1.204, gt=0)

    def properties(self) -> AirProperties:
        return AirProperties(c=self.c_kj_per_kg_k, rho=self.rho_kg_per_m3)


class ExperimentConfig(_Model):
    lsp_c: float = 23.3
    hsp_c: float = 24.4

    @model_validator(mode="after")
    def _distinct(self):
        if not self.lsp_c < self.hsp_c:
            raise ValueError("lsp_c must be strictly below hsp_c")
        return self


class WindowConfig(_Model):
    start_hour: int = Field(default=6, ge=0, le=23)
    end_hour: int = Field(default=20, ge=1, le=24)
    weekdays_only: bool = True

    @model_validator(mode="after")
    def _ordered(self):
        if not self.start_hour < self.end_hour:
            raise ValueError("window start_hour must be below end_hour")
        return self


class FitConfig(_Model):
    flow_threshold_m3s: float = Field(default=0.1, ge=0)
    building_all_hours: bool = True  # meter runs around the clock
    min_obs: int = Field(default=3, ge=3)
    donors: dict[str, str] = Field(default_factory=dict)  # ahu path -> donor path


class MetricsConfig(_Model):
    coverage_threshold: float = Field(default=0.8, ge=0, le=1)
    top_fraction: float = Field(default=0.3, ge=0, le=1)
    zone_window: str = "operating"
    building_window: str = "full_day"


class SimulateConfig(_Model):
    days: int = Field(default=54, ge=4)
    seed: int = 42
    start: str = "2021-06-22"
    buildings: int = Field(default=3, ge=1)
    ahus_per_building: int = Field(default=2, ge=1)
    zones_per_ahu: int = Field(default=8, ge=1)
    noise: dict[str, float] = Field(default_factory=dict)
    district_base_kw: float = Field(default=300.0, ge=0)


class RunConfig(_Model):
    paths: PathsConfig = Field(default_factory=PathsConfig)
    air: AirConfig = Field(default_factory=AirConfig)
    interval_minutes: int = Field(default=15, ge=1)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)
    window: WindowConfig = Field(default_factory=WindowConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)

    @property
    def interval(self) -> pd.Timedelta:
        return pd.Timedelta(minutes=self.interval_minutes)

    def require_paths(self, *names: str) -> dict:
        """Resolves the named paths, insisting each is set and readable."""
        out = {}
        for name in names:
            value = getattr(self.paths, name)
            if value is None:
                raise InputError(f"config paths.{name} is required for this command")
            p = Path(value)
            if not p.exists():
                raise InputError(f"config paths.{name}: {p} does not exist")
            out[name] = p
        return out

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise InputError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise InputError(f"config {path} is not valid JSON: {e}") from e
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Applies dotted-path overrides, e.g. {"simulate.seed": "7"}."""
        raw = self.model_dump()
        for dotted, value in overrides.items():
            parts = dotted.split(".")
            node = raw
            for part in parts[:-1]:
                if not isinstance(node.get(part), dict):
                    raise ConfigError(f"unknown config section {dotted!r}")
                node = node[part]
            leaf = parts[-1]
            if leaf not in node:
                raise ConfigError(f"unknown config key {dotted!r}")
            try:
                node[leaf] = json.loads(value)
            except json.JSONDecodeError:
                node[leaf] = value
        return self.from_dict(raw)
