"""Synthetic Gaussian market data with controlled correlation structure.

Two generators: a direct return panel whose maturity-lag correlation is
exactly decay**|lag| (for estimator tests), and a yield-curve panel whose
derived monthly returns carry the same structure up to a small
duration-weighting factor. Curves stay stationary around a configurable
base shape so long samples do not drift.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .marketdata import ReturnPanel, YieldCurve


def _month_labels(n_dates, start_year=1990):
    labels = []
    year, month = start_year, 1
    for _ in range(n_dates):
        labels.append(f"{year:04d}-{month:02d}-01")
        month += 1
        if month > 12:
            month = 1
            year += 1
    return labels


def _field_cholesky(n, decay):
    idx = np.arange(n)
    corr = decay ** np.abs(idx[:, None] - idx[None, :])
    return np.linalg.cholesky(corr)


def gaussian_return_panel(n_dates, n_maturities, decay=0.9, seed=42,
                          vols=None, drifts=None):
    """Return panel whose maturity-lag correlation is exactly decay**|lag|.

    Rows are independent draws of a stationary Gaussian field over the
    maturity axis; per-maturity vols and drifts are applied afterwards and
    do not change the correlation structure.
    """
    if not 0.0 <= decay < 1.0:
        raise InputError("decay must lie in [0, 1)")
    if n_dates < 2 or n_maturities < 2:
        raise InputError("need at least 2 dates and 2 maturities")
    rng = np.random.default_rng(seed)
    chol = _field_cholesky(n_maturities, decay)
    field = rng.standard_normal((n_dates, n_maturities)) @ chol.T
    if vols is None:
        vols = np.full(n_maturities, 0.01)
    vols = np.asarray(vols, dtype=float)
    if np.any(vols <= 0):
        raise InputError("vols must be positive")
    returns = field * vols
    if drifts is not None:
        returns = returns + np.asarray(drifts, dtype=float)
    return ReturnPanel(
        dates=tuple(_month_labels(n_dates)),
        maturities=np.arange(1, n_maturities + 1),
        returns=returns,
    )


def base_curve(months, level=0.03, slope=0.02, timescale_years=2.0):
    """Upward-sloping base yields: level + slope * (1 - exp(-t / timescale))."""
    t = np.asarray(months, dtype=float) / 12.0
    return level + slope * (1.0 - np.exp(-t / timescale_years))


def synthetic_curves(seed=42, n_dates=500, months=42, decay=0.9,
                     shock_vol=0.0015, level=0.03, slope=0.02):
    """Monthly yield curves with correlated stationary fluctuations.

    Each date's curve is the base shape plus an independent draw of a
    Gaussian field over the monthly tenor grid with correlation
    decay**|lag| and standard deviation shock_vol. The derived one-month
    returns then inherit that correlation across maturities up to the
    duration weights of adjacent months.
    """
    if n_dates < 2:
        raise InputError("need at least 2 dates")
    if months < 3:
        raise InputError("need a tenor grid of at least 3 months")
    if shock_vol < 0:
        raise InputError("shock_vol must be non-negative")
    rng = np.random.default_rng(seed)
    grid = np.arange(1, months + 1)
    base = base_curve(grid, level=level, slope=slope)
    chol = _field_cholesky(months, decay)
    curves = []
    for label in _month_labels(n_dates):
        shock = shock_vol * (chol @ rng.standard_normal(months))
        curves.append(YieldCurve(label, grid / 12.0, base + shock))
    return curves


def curves_to_csv(curves):
    """Long-format CSV text (date,tenor_years,yield) for a curve list."""
    lines = ["date,tenor_years,yield"]
    for curve in curves:
        for tenor, value in zip(curve.tenors, curve.yields):
            lines.append(f"{curve.date},{float(tenor)!r},{float(value)!r}")
    return "\n".join(lines) + "\n"
