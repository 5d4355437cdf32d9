"""FastAPI application exposing the pipeline stages.

Each endpoint takes a full run configuration in the request body and
executes the same stage function the CLI uses, so the two front ends
cannot drift apart. Artifacts land on the server's filesystem at the
configured output directory; responses return their paths and
summaries.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, runner
from ..errors import (
    FitError,
    InputError,
    MetricError,
    SimulationError,
    ZoneMeterError,
)
from . import schemas

_STATUS = (
    (InputError, 400),
    (FitError, 422),
    (MetricError, 422),
    (SimulationError, 500),
    (ZoneMeterError, 500),
)


def _status_for(exc: ZoneMeterError) -> int:
    for cls, code in _STATUS:
        if isinstance(exc, cls):
            return code
    return 500


def create_app(default_config: schemas.RunConfig | None = None) -> FastAPI:
    """Builds the service; a default config fills omitted request bodies."""
    app = FastAPI(
        title="zonemeter",
        version=__version__,
        description="Zone-level electrical load metering from building trend data.",
    )

    @app.exception_handler(ZoneMeterError)
    async def _domain_error(request: Request, exc: ZoneMeterError):
        body = schemas.ErrorBody(error=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=_status_for(exc), content=body.model_dump())

    def _config(body: schemas.RunConfig | None) -> schemas.RunConfig:
        if body is not None:
            return body
        if default_config is not None:
            return default_config
        return schemas.RunConfig()

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(config: schemas.RunConfig | None = None):
        return runner.run_simulate(_config(config))

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit(config: schemas.RunConfig | None = None):
        return runner.run_fit(_config(config))

    @app.post("/disaggregate", response_model=schemas.DisaggregateResponse)
    def disaggregate(config: schemas.RunConfig | None = None):
        return runner.run_disaggregate(_config(config))

    @app.post("/report", response_model=schemas.ReportResponse)
    def report(config: schemas.RunConfig | None = None):
        return runner.run_report(_config(config))

    @app.post("/pipeline", response_model=schemas.PipelineResponse)
    def pipeline(config: schemas.RunConfig | None = None):
        return runner.run_pipeline(_config(config))

    return app
