"""Request and response models for the service endpoints.

Request validation enforces the run-config invariants (grid bounds, Pade
orders, truncation depth) before any computation starts, so a bad config
is rejected with a 422 and never reaches the numerical layer.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_GRID = (2, 41)


class PadeParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: int = Field(default=0, ge=0)
    n: int = Field(default=1, ge=1)
    k: int = Field(default=11, ge=0)


class ModelSpec(BaseModel):
    """Injected AR(1) correlation and expected-return model."""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(gt=-1.0, lt=1.0)
    beta: float = Field(gt=-1.0, lt=1.0)
    e0: float = 1.0


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=42, ge=0)
    n_dates: int = Field(default=500, ge=2)
    months: int = Field(default=42, ge=2)
    decay: float = Field(default=0.9, gt=-1.0, lt=1.0)
    shock_vol: float = Field(default=0.0015, ge=0.0)
    level: float = 0.03
    slope: float = 0.02


class _CurveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    curves_csv: str
    grid: tuple[int, int] = DEFAULT_GRID
    max_lag: int = Field(default=12, ge=1)

    @model_validator(mode="after")
    def _grid_bounds(self):
        start, end = self.grid
        if start < 1:
            raise ValueError("grid must start at month 1 or later")
        if end - start + 1 < 2:
            raise ValueError("grid needs at least 2 maturities")
        return self


class EstimateRequest(_CurveRequest):
    pass


class FitRequest(_CurveRequest):
    pade: PadeParams = PadeParams()


class _SpectralRequest(FitRequest):
    trunc: int = Field(default=256, ge=4)

    @model_validator(mode="after")
    def _trunc_depth(self):
        # truncation must dominate the rational degrees for the expansions
        if self.trunc < 4 * (self.pade.m + self.pade.n):
            raise ValueError("trunc must be at least 4 * (m + n)")
        return self


class FactorizeRequest(_SpectralRequest):
    pass


class OptimizeRequest(_SpectralRequest):
    gamma: float = Field(default=0.5, gt=0.0)
    sum_to_one: bool = False


class ArbitrageRequest(_SpectralRequest):
    threshold: float = Field(default=2.0, gt=0.0)


class BacktestRequest(_SpectralRequest):
    window: int = Field(default=36, ge=2)
    fit_once: bool = False


class PipelineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    curves_csv: Optional[str] = None
    model: Optional[ModelSpec] = None
    grid: tuple[int, int] = DEFAULT_GRID
    max_lag: int = Field(default=12, ge=1)
    pade: PadeParams = PadeParams()
    trunc: int = Field(default=256, ge=4)
    gamma: float = Field(default=0.5, gt=0.0)
    sum_to_one: bool = False
    threshold: float = Field(default=2.0, gt=0.0)
    window: int = Field(default=36, ge=2)
    fit_once: bool = False

    @model_validator(mode="after")
    def _has_input(self):
        if self.curves_csv is None and self.model is None:
            raise ValueError("provide curves_csv or a model section")
        start, end = self.grid
        if start < 1:
            raise ValueError("grid must start at month 1 or later")
        if end - start + 1 < 2:
            raise ValueError("grid needs at least 2 maturities")
        if self.trunc < 4 * (self.pade.m + self.pade.n):
            raise ValueError("trunc must be at least 4 * (m + n)")
        return self


# ---- response shapes (mirror the report dicts exactly) ----


class RationalInfo(BaseModel):
    scale: float
    numerator: list[float]
    denominator: list[float]
    zeros: list[tuple[float, float]]
    poles: list[tuple[float, float]]


class CorrelationTable(BaseModel):
    lags: list[int]
    actual: list[float]
    pair_counts: Optional[list[int]] = None
    fitted: Optional[list[float]] = None
    residuals: Optional[list[float]] = None


class SymbolInfo(BaseModel):
    circle_min: float
    circle_max: float
    truncation: int
    rational: RationalInfo
    laurent_head: list[float]


class FactorizationInfo(BaseModel):
    scale: float
    plus_factor: RationalInfo
    minus_factor: RationalInfo
    plus_expansion_head: list[float]
    minus_expansion_head: list[float]


class ExpectationsInfo(BaseModel):
    months: list[int]
    expected_returns: list[float]
    variances: list[float]


class AllocationInfo(BaseModel):
    gamma: float | Literal["sum-to-one"]
    utility: Optional[float]
    expected_return: float
    expected_return_annualized: float
    variance: float
    net_position: float
    months: list[int]
    raw: list[float]
    normalized: list[float]


class ArbitrageInfo(BaseModel):
    invertible: bool
    circle_interval: tuple[float, float]
    kernel_dimension_estimate: int
    classical_arbitrage: Literal["absent", "present", "not-applicable"]
    quadratic_form: Optional[float]
    threshold: float
    near_arbitrage: bool


class SummaryStats(BaseModel):
    mean: float
    std: float
    min: float


class BacktestSummary(BaseModel):
    optimal: SummaryStats
    benchmark: SummaryStats


class BacktestSection(BaseModel):
    mode: Literal["walk-forward", "fit-once"]
    window: int
    dates: list[str]
    optimal_returns_annualized: list[float]
    benchmark_returns_annualized: list[float]
    summary: BacktestSummary


class GenerateResponse(BaseModel):
    command: Literal["generate"]
    seed: int
    n_dates: int
    months: int
    decay: float
    csv: str


class EstimateResponse(BaseModel):
    command: Literal["estimate"]
    grid: list[int]
    n_dates: int
    max_lag: int
    correlation: CorrelationTable


class FitResponse(BaseModel):
    command: Literal["fit"]
    grid: list[int]
    n_dates: int
    max_lag: int
    pade: PadeParams
    correlation: CorrelationTable
    fit: RationalInfo


class FactorizeResponse(BaseModel):
    command: Literal["factorize"]
    grid: list[int]
    n_dates: int
    max_lag: int
    pade: PadeParams
    correlation: CorrelationTable
    fit: RationalInfo
    symbol: SymbolInfo
    factorization: FactorizationInfo


class OptimizeResponse(BaseModel):
    command: Literal["optimize"]
    grid: list[int]
    n_dates: int
    max_lag: int
    pade: PadeParams
    correlation: CorrelationTable
    fit: RationalInfo
    symbol: SymbolInfo
    expectations: ExpectationsInfo
    allocation: AllocationInfo
    benchmark: AllocationInfo


class ArbitrageResponse(BaseModel):
    command: Literal["check-arbitrage"]
    grid: list[int]
    n_dates: int
    max_lag: int
    pade: PadeParams
    correlation: CorrelationTable
    fit: RationalInfo
    symbol: SymbolInfo
    arbitrage: ArbitrageInfo


class BacktestResponse(BaseModel):
    command: Literal["backtest"]
    grid: list[int]
    mode: Literal["walk-forward", "fit-once"]
    window: int
    dates: list[str]
    optimal_returns_annualized: list[float]
    benchmark_returns_annualized: list[float]
    summary: BacktestSummary


class PipelineResponse(BaseModel):
    command: Literal["pipeline"]
    grid: list[int]
    mode: Literal["data", "model"]
    n_dates: Optional[int] = None
    max_lag: Optional[int] = None
    pade: Optional[PadeParams] = None
    model: Optional[ModelSpec] = None
    correlation: CorrelationTable
    fit: RationalInfo
    symbol: SymbolInfo
    factorization: FactorizationInfo
    expectations: ExpectationsInfo
    allocation: AllocationInfo
    benchmark: AllocationInfo
    closed_form_utility: Optional[float] = None
    arbitrage: ArbitrageInfo
    backtest: Optional[BacktestSection] = None


class ErrorDetail(BaseModel):
    kind: str
    stage: Optional[str]
    error: str
    message: str


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
