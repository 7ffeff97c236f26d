"""Stage-tagged end-to-end runs producing JSON-ready report dicts.

Every entry point here takes plain Python values and returns a dict of
plain Python values (floats, ints, strings, lists), so the service layer
can return them directly and the CLI can render them to CSV or JSON.
Failures never substitute defaults: any module error aborts the run
wrapped in a PipelineError naming the stage that raised it.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from .arbitrage import build_report, invertibility_check
from .corrfit import PadeOrder, estimate_correlation, pade_generalized
from .errors import BondoptError, InputError, PipelineError, WindowTooShort
from .laurent import RationalFunction, expand_rational
from .marketdata import ReturnPanel, compute_returns, parse_curves, variance_estimates
from .portfolio import (
    ar1_closed_form,
    benchmark_uncorrelated,
    normalize_expectations,
    optimize,
    sum_to_one,
)
from .synthetic import curves_to_csv, synthetic_curves
from .wienerhopf import build_symbol, factorize

DEFAULT_WINDOW = 36

_HEAD = 17  # leading coefficients shown for series artifacts


@contextmanager
def stage(name):
    """Tag module errors with the pipeline stage they occurred in."""
    try:
        yield
    except PipelineError:
        raise
    except BondoptError as exc:
        raise PipelineError(name, exc) from exc


def _floats(values):
    return [float(v) for v in values]


def _roots(values):
    return [[float(r.real), float(r.imag)] for r in np.asarray(values, dtype=complex)]


def _rational_info(f):
    return {
        "scale": float(f.scale),
        "numerator": _floats(f.numerator.coefficients),
        "denominator": _floats(f.denominator.coefficients),
        "zeros": _roots(f.numerator_roots),
        "poles": _roots(f.denominator_roots),
    }


def _correlation_table(corr, fit=None):
    table = {
        "lags": list(range(len(corr.values))),
        "actual": _floats(corr.values),
        "pair_counts": [int(c) for c in corr.pair_counts],
    }
    if fit is not None:
        fitted = expand_rational(fit, "plus", len(corr.values) - 1).coefficients
        table["fitted"] = _floats(fitted)
        table["residuals"] = _floats(np.asarray(corr.values) - fitted)
    return table


def _symbol_info(sym):
    head = min(_HEAD, sym.truncation + 1)
    return {
        "circle_min": float(sym.circle_min),
        "circle_max": float(sym.circle_max),
        "truncation": int(sym.truncation),
        "rational": _rational_info(sym.rational),
        "laurent_head": _floats(
            [sym.laurent.coefficient(k) for k in range(head)]
        ),
    }


def _factorization_info(fac):
    head = min(_HEAD, fac.truncation + 1)
    return {
        "scale": float(fac.scale),
        "plus_factor": _rational_info(fac.exp_minus_plus),
        "minus_factor": _rational_info(fac.exp_minus_minus),
        "plus_expansion_head": _floats(
            [fac.plus_expansion.coefficient(k) for k in range(head)]
        ),
        "minus_expansion_head": _floats(
            [fac.minus_expansion.coefficient(-k) for k in range(head)]
        ),
    }


def _allocation_info(alloc, months):
    n = len(months)
    return {
        "gamma": alloc.gamma if isinstance(alloc.gamma, str) else float(alloc.gamma),
        "utility": None if alloc.utility is None else float(alloc.utility),
        "expected_return": float(alloc.expected_return),
        "expected_return_annualized": 12.0 * float(alloc.expected_return),
        "variance": float(alloc.variance),
        "net_position": float(np.sum(alloc.raw)),
        "months": [int(m) for m in months],
        "raw": _floats(alloc.raw[:n]),
        "normalized": _floats(alloc.normalized.slice(0, n - 1).coefficients),
    }


def _arbitrage_info(report):
    return {
        "invertible": bool(report.invertible),
        "circle_interval": [
            float(report.circle_interval[0]),
            float(report.circle_interval[1]),
        ],
        "kernel_dimension_estimate": int(report.kernel_dimension_estimate),
        "classical_arbitrage": report.classical_arbitrage,
        "quadratic_form": (
            None if report.quadratic_form is None else float(report.quadratic_form)
        ),
        "threshold": float(report.threshold),
        "near_arbitrage": bool(report.near_arbitrage),
    }


def _grid_months(grid):
    start, end = int(grid[0]), int(grid[1])
    if start < 1:
        raise InputError(f"grid must start at month 1 or later, got {start}")
    if end - start + 1 < 2:
        raise InputError(f"grid {start}..{end} has fewer than 2 maturities")
    return list(range(start, end + 1))


def _panel_and_correlation(curves_csv, grid, max_lag):
    months = _grid_months(grid)
    with stage("load"):
        curves = parse_curves(curves_csv)
    with stage("returns"):
        panel = compute_returns(curves, months)
    with stage("estimate"):
        corr = estimate_correlation(panel, max_lag)
    return months, panel, corr


def _fit_correlation(corr, pade):
    order = PadeOrder(*pade)
    with stage("fit"):
        return pade_generalized(np.asarray(corr.values), order), order


def _spectral(chat, trunc):
    with stage("symbol"):
        sym = build_symbol(chat, trunc)
    with stage("factorize"):
        fac = factorize(sym)
    return sym, fac


def _expectations_from(panel):
    with stage("expectations"):
        variances = variance_estimates(panel)
        return normalize_expectations(panel.means, variances)


def run_generate(seed=42, n_dates=500, months=42, decay=0.9, shock_vol=0.0015,
                 level=0.03, slope=0.02):
    with stage("generate"):
        curves = synthetic_curves(
            seed=seed, n_dates=n_dates, months=months, decay=decay,
            shock_vol=shock_vol, level=level, slope=slope,
        )
        text = curves_to_csv(curves)
    return {
        "command": "generate",
        "seed": int(seed),
        "n_dates": int(n_dates),
        "months": int(months),
        "decay": float(decay),
        "csv": text,
    }


def run_estimate(curves_csv, grid, max_lag):
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    return {
        "command": "estimate",
        "grid": months,
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "correlation": _correlation_table(corr),
    }


def run_fit(curves_csv, grid, max_lag, pade):
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    fit, order = _fit_correlation(corr, pade)
    return {
        "command": "fit",
        "grid": months,
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "pade": {"m": order.m, "n": order.n, "k": order.k},
        "correlation": _correlation_table(corr, fit),
        "fit": _rational_info(fit),
    }


def run_factorize(curves_csv, grid, max_lag, pade, trunc):
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    fit, order = _fit_correlation(corr, pade)
    sym, fac = _spectral(fit, trunc)
    return {
        "command": "factorize",
        "grid": months,
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "pade": {"m": order.m, "n": order.n, "k": order.k},
        "correlation": _correlation_table(corr, fit),
        "fit": _rational_info(fit),
        "symbol": _symbol_info(sym),
        "factorization": _factorization_info(fac),
    }


def _optimal_allocation(fac, e, gamma, sum_to_one_flag):
    with stage("optimize"):
        alloc = optimize(fac, e, gamma)
        if sum_to_one_flag:
            alloc = sum_to_one(alloc)
        return alloc


def run_optimize(curves_csv, grid, max_lag, pade, trunc, gamma,
                 sum_to_one_flag=False):
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    fit, order = _fit_correlation(corr, pade)
    sym, fac = _spectral(fit, trunc)
    e = _expectations_from(panel)
    alloc = _optimal_allocation(fac, e, gamma, sum_to_one_flag)
    with stage("optimize"):
        bench = benchmark_uncorrelated(e, trunc)
    return {
        "command": "optimize",
        "grid": months,
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "pade": {"m": order.m, "n": order.n, "k": order.k},
        "correlation": _correlation_table(corr, fit),
        "fit": _rational_info(fit),
        "symbol": _symbol_info(sym),
        "expectations": {
            "months": months,
            "expected_returns": _floats(e.expected_returns),
            "variances": _floats(e.variances),
        },
        "allocation": _allocation_info(alloc, months),
        "benchmark": _allocation_info(bench, months),
    }


def run_arbitrage(curves_csv, grid, max_lag, pade, trunc, threshold):
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    fit, order = _fit_correlation(corr, pade)
    with stage("symbol"):
        sym = build_symbol(fit, trunc)
    invertible, _ = invertibility_check(sym)
    fac = None
    if invertible:
        with stage("factorize"):
            fac = factorize(sym)
    e = _expectations_from(panel)
    with stage("arbitrage"):
        report = build_report(sym, e, fac, threshold)
    return {
        "command": "check-arbitrage",
        "grid": months,
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "pade": {"m": order.m, "n": order.n, "k": order.k},
        "correlation": _correlation_table(corr, fit),
        "fit": _rational_info(fit),
        "symbol": _symbol_info(sym),
        "arbitrage": _arbitrage_info(report),
    }


def _window_weights(window_panel, max_lag, pade, trunc):
    """Sum-to-one optimal and benchmark weights from an in-sample panel."""
    with stage("estimate"):
        corr = estimate_correlation(window_panel, max_lag)
    fit, _ = _fit_correlation(corr, pade)
    sym, fac = _spectral(fit, trunc)
    e = _expectations_from(window_panel)
    alloc = _optimal_allocation(fac, e, gamma=0.5, sum_to_one_flag=True)
    with stage("optimize"):
        bench = benchmark_uncorrelated(e, trunc)
    return alloc.raw, bench.raw


def _sub_panel(panel, rows):
    return ReturnPanel(
        dates=tuple(panel.dates[i] for i in rows),
        maturities=panel.maturities,
        returns=panel.returns[rows],
    )


def run_backtest(curves_csv, grid, max_lag, pade, trunc, window=DEFAULT_WINDOW,
                 fit_once=False):
    months = _grid_months(grid)
    with stage("load"):
        curves = parse_curves(curves_csv)
    with stage("returns"):
        panel = compute_returns(curves, months)
    n_rows = panel.returns.shape[0]
    if window < 2:
        raise WindowTooShort(f"window must be at least 2 dates, got {window}")
    if fit_once:
        # in-sample design: one fit on the whole panel, realized everywhere
        realized_rows = list(range(n_rows))
        opt_w, bench_w = _window_weights(panel, max_lag, pade, trunc)
        weights = [(opt_w, bench_w)] * len(realized_rows)
    else:
        if n_rows <= window:
            raise WindowTooShort(
                f"walk-forward needs more than window={window} return rows, "
                f"got {n_rows}"
            )
        realized_rows = list(range(window, n_rows))
        weights = []
        for r in realized_rows:
            sub = _sub_panel(panel, list(range(r - window, r)))
            weights.append(_window_weights(sub, max_lag, pade, trunc))
    optimal_returns = []
    benchmark_returns = []
    for (opt_w, bench_w), r in zip(weights, realized_rows):
        row = panel.returns[r]
        optimal_returns.append(12.0 * float(opt_w @ row))
        benchmark_returns.append(12.0 * float(bench_w @ row))
    optimal_returns = np.asarray(optimal_returns)
    benchmark_returns = np.asarray(benchmark_returns)

    def summary(series):
        return {
            "mean": float(series.mean()),
            "std": float(series.std(ddof=1)) if len(series) > 1 else 0.0,
            "min": float(series.min()),
        }

    return {
        "command": "backtest",
        "grid": months,
        "mode": "fit-once" if fit_once else "walk-forward",
        "window": int(window),
        "dates": [panel.dates[r] for r in realized_rows],
        "optimal_returns_annualized": _floats(optimal_returns),
        "benchmark_returns_annualized": _floats(benchmark_returns),
        "summary": {
            "optimal": summary(optimal_returns),
            "benchmark": summary(benchmark_returns),
        },
    }


def _model_params(model):
    try:
        alpha = float(model["alpha"])
        beta = float(model["beta"])
    except KeyError as exc:
        raise InputError(f"model section is missing {exc.args[0]!r}") from exc
    e0 = float(model.get("e0", 1.0))
    if not abs(alpha) < 1.0:
        raise InputError(f"model alpha must be in (-1, 1), got {alpha!r}")
    if not abs(beta) < 1.0:
        raise InputError(f"model beta must be in (-1, 1), got {beta!r}")
    return alpha, beta, e0


def _model_expectations(beta, e0, trunc):
    er = e0 * beta ** np.arange(trunc + 1, dtype=float)
    return normalize_expectations(er, np.ones(trunc + 1))


def _model_generating(alpha):
    if alpha == 0.0:
        return RationalFunction.constant(1.0)
    return RationalFunction(-1.0 / alpha, [], [1.0 / alpha])


def run_pipeline(curves_csv=None, grid=(2, 41), max_lag=12, pade=(0, 1, 11),
                 trunc=256, gamma=0.5, sum_to_one_flag=False, threshold=2.0,
                 window=DEFAULT_WINDOW, fit_once=False, model=None):
    """Full run: data (or injected model) through allocation and checks."""
    if model is not None:
        return _run_model_pipeline(model, grid, max_lag, trunc, gamma,
                                   sum_to_one_flag, threshold)
    if curves_csv is None:
        raise InputError("pipeline needs an input curve file or a model section")
    months, panel, corr = _panel_and_correlation(curves_csv, grid, max_lag)
    fit, order = _fit_correlation(corr, pade)
    sym, fac = _spectral(fit, trunc)
    e = _expectations_from(panel)
    alloc = _optimal_allocation(fac, e, gamma, sum_to_one_flag)
    with stage("optimize"):
        bench = benchmark_uncorrelated(e, trunc)
    with stage("arbitrage"):
        arb = build_report(sym, e, fac, threshold)
    backtest = run_backtest(
        curves_csv, grid, max_lag, pade, trunc, window=window, fit_once=fit_once
    )
    return {
        "command": "pipeline",
        "grid": months,
        "mode": "data",
        "n_dates": len(panel.dates),
        "max_lag": int(max_lag),
        "pade": {"m": order.m, "n": order.n, "k": order.k},
        "correlation": _correlation_table(corr, fit),
        "fit": _rational_info(fit),
        "symbol": _symbol_info(sym),
        "factorization": _factorization_info(fac),
        "expectations": {
            "months": months,
            "expected_returns": _floats(e.expected_returns),
            "variances": _floats(e.variances),
        },
        "allocation": _allocation_info(alloc, months),
        "benchmark": _allocation_info(bench, months),
        "arbitrage": _arbitrage_info(arb),
        "backtest": {
            key: backtest[key]
            for key in (
                "mode", "window", "dates",
                "optimal_returns_annualized", "benchmark_returns_annualized",
                "summary",
            )
        },
    }


def _run_model_pipeline(model, grid, max_lag, trunc, gamma, sum_to_one_flag,
                        threshold):
    """Closed-form mode: inject the correlation model, skip estimation."""
    months = _grid_months(grid)
    with stage("model"):
        alpha, beta, e0 = _model_params(model)
        chat = _model_generating(alpha)
        e = _model_expectations(beta, e0, trunc)
    sym, fac = _spectral(chat, trunc)
    alloc = _optimal_allocation(fac, e, gamma, sum_to_one_flag)
    with stage("optimize"):
        bench = benchmark_uncorrelated(e, trunc)
    with stage("arbitrage"):
        arb = build_report(sym, e, fac, threshold)
    with stage("model"):
        model_corr = _floats(alpha ** np.arange(max_lag + 1, dtype=float))
        _, closed_u = ar1_closed_form(alpha, beta, e0, float(gamma))
    n = len(months)
    return {
        "command": "pipeline",
        "grid": months,
        "mode": "model",
        "model": {"alpha": alpha, "beta": beta, "e0": e0},
        "correlation": {
            "lags": list(range(max_lag + 1)),
            "actual": model_corr,
            "fitted": model_corr,
        },
        "fit": _rational_info(chat),
        "symbol": _symbol_info(sym),
        "factorization": _factorization_info(fac),
        "expectations": {
            "months": months,
            "expected_returns": _floats(e.expected_returns[:n]),
            "variances": _floats(e.variances[:n]),
        },
        "allocation": _allocation_info(alloc, months),
        "benchmark": _allocation_info(bench, months),
        "closed_form_utility": float(closed_u),
        "arbitrage": _arbitrage_info(arb),
        "backtest": None,
    }
