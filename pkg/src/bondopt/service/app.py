"""FastAPI application exposing each pipeline run as a POST endpoint.

Domain failures map to HTTP 400 with a structured detail carrying the
error kind (validation vs numerical), the pipeline stage when known, and
the concrete error class, so clients can translate them back into exit
codes without parsing messages.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import BondoptError, PipelineError
from . import schemas


def _error_detail(exc):
    if isinstance(exc, PipelineError):
        name = type(exc.cause).__name__
        stage = exc.stage
    else:
        name = type(exc).__name__
        stage = None
    return schemas.ErrorDetail(
        kind=exc.kind, stage=stage, error=name, message=str(exc)
    )


def create_app() -> FastAPI:
    app = FastAPI(title="bondopt", version=__version__)

    @app.exception_handler(BondoptError)
    async def _domain_error(request: Request, exc: BondoptError):
        detail = _error_detail(exc).model_dump()
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate(req: schemas.GenerateRequest):
        return pipeline.run_generate(
            seed=req.seed, n_dates=req.n_dates, months=req.months,
            decay=req.decay, shock_vol=req.shock_vol, level=req.level,
            slope=req.slope,
        )

    @app.post("/estimate", response_model=schemas.EstimateResponse)
    def estimate(req: schemas.EstimateRequest):
        return pipeline.run_estimate(req.curves_csv, req.grid, req.max_lag)

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit(req: schemas.FitRequest):
        return pipeline.run_fit(
            req.curves_csv, req.grid, req.max_lag,
            (req.pade.m, req.pade.n, req.pade.k),
        )

    @app.post("/factorize", response_model=schemas.FactorizeResponse)
    def factorize(req: schemas.FactorizeRequest):
        return pipeline.run_factorize(
            req.curves_csv, req.grid, req.max_lag,
            (req.pade.m, req.pade.n, req.pade.k), req.trunc,
        )

    @app.post("/optimize", response_model=schemas.OptimizeResponse)
    def optimize(req: schemas.OptimizeRequest):
        return pipeline.run_optimize(
            req.curves_csv, req.grid, req.max_lag,
            (req.pade.m, req.pade.n, req.pade.k), req.trunc,
            req.gamma, sum_to_one_flag=req.sum_to_one,
        )

    @app.post("/check-arbitrage", response_model=schemas.ArbitrageResponse)
    def check_arbitrage(req: schemas.ArbitrageRequest):
        return pipeline.run_arbitrage(
            req.curves_csv, req.grid, req.max_lag,
            (req.pade.m, req.pade.n, req.pade.k), req.trunc, req.threshold,
        )

    @app.post("/backtest", response_model=schemas.BacktestResponse)
    def backtest(req: schemas.BacktestRequest):
        return pipeline.run_backtest(
            req.curves_csv, req.grid, req.max_lag,
            (req.pade.m, req.pade.n, req.pade.k), req.trunc,
            window=req.window, fit_once=req.fit_once,
        )

    @app.post("/pipeline", response_model=schemas.PipelineResponse)
    def full_pipeline(req: schemas.PipelineRequest):
        model = None if req.model is None else req.model.model_dump()
        return pipeline.run_pipeline(
            curves_csv=req.curves_csv, grid=req.grid, max_lag=req.max_lag,
            pade=(req.pade.m, req.pade.n, req.pade.k), trunc=req.trunc,
            gamma=req.gamma, sum_to_one_flag=req.sum_to_one,
            threshold=req.threshold, window=req.window,
            fit_once=req.fit_once, model=model,
        )

    return app
