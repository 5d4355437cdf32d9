"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from ..config import RunConfig

__all__ = [
    "RunConfig",
    "SimulateResponse",
    "FitResponse",
    "DisaggregateResponse",
    "ReportResponse",
    "PipelineResponse",
    "HealthResponse",
    "ErrorBody",
]


class _Response(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SimulateResponse(_Response):
    data: str
    catalog: str
    topology: str
    truth: str
    truth_loads: str
    commissioning: str
    days: int
    zones: int
    timestamps: int
    seed: int


class FitResponse(_Response):
    models: str
    fit_report: str
    n_fresh_air: int
    n_buildings: int
    n_fans: int
    report_text: str | None = None


class DisaggregateResponse(_Response):
    zone_loads: str
    diagnostics: str
    n_zones: int
    timestamps: int
    mean_coverage: float
    min_coverage: float
    flags: dict[str, int]


class ReportResponse(_Response):
    report: str
    thermal: str
    charts: list[str]
    n_buildings: int
    n_ahus: int
    n_zones: int


class PipelineResponse(_Response):
    simulate: SimulateResponse
    fit: FitResponse
    disaggregate: DisaggregateResponse
    report: ReportResponse


class HealthResponse(_Response):
    status: str
    version: str


class ErrorBody(_Response):
    error: str
    detail: str
