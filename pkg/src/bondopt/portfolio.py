"""Mean-variance optimal bond allocations over the maturity axis.

Holdings are computed in normalized units first: scaling each maturity's
return by its standard deviation turns the covariance into the pure
correlation symbol A, so the optimum is

    Y = (1/2 gamma) * applied,   applied = apply_inverse(fac, E)

with utility <E|applied>/(4 gamma). Raw bond holdings follow by dividing
out the standard deviations on the observed maturity grid; the series
itself may extend beyond the grid (the model is stationary in maturity),
and reports truncate to the investable universe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NonPositiveVariance, ZeroNetPosition
from .laurent import (
    DEFAULT_TRUNCATION,
    LaurentSeries,
    Polynomial,
    RationalFunction,
    inner_product,
    multiply,
    project_plus,
)
from .wienerhopf import apply_inverse, identity_factorization

SUM_TO_ONE = "sum-to-one"

_ZERO_NET_TOL = 1e-12


@dataclass(frozen=True)
class NormalizedExpectations:
    """Per-unit-risk expected returns E(t) = ER(t)/sqrt(V(t)) as a series."""

    series: LaurentSeries
    expected_returns: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        if self.series.min_index < 0:
            raise InputError("expectation series must have no negative powers")
        if len(self.expected_returns) != len(self.variances):
            raise InputError("expected returns and variances differ in length")
        if np.any(self.variances <= 0.0):
            raise NonPositiveVariance(
                f"variances must be positive; min is {float(np.min(self.variances))!r}"
            )


@dataclass(frozen=True)
class Allocation:
    """Optimal holdings, normalized and in raw bond units.

    gamma is the risk aversion used, or the tag "sum-to-one" after
    rescaling (utility is then undefined and set to None).
    """

    normalized: LaurentSeries
    raw: np.ndarray
    utility: float | None
    variance: float
    expected_return: float
    gamma: float | str


def normalize_expectations(er, v):
    er = np.asarray(er, dtype=float)
    v = np.asarray(v, dtype=float)
    if er.ndim != 1 or v.ndim != 1:
        raise InputError("expected returns and variances must be one-dimensional")
    if len(er) != len(v):
        raise InputError("expected returns and variances differ in length")
    if len(er) == 0:
        raise InputError("need at least one maturity")
    if np.any(v <= 0.0):
        raise NonPositiveVariance(
            f"variances must be positive; min is {float(np.min(v))!r}"
        )
    return NormalizedExpectations(LaurentSeries(er / np.sqrt(v), 0), er, v)


def portfolio_variance(sym, y):
    """Quadratic form sum_ij y_i A_{i-j} y_j over the truncation."""
    if y.min_index < 0:
        raise InputError("holdings must have no negative powers")
    return inner_product(y, project_plus(multiply(sym.laurent, y)))


def objective_value(sym, e, y, gamma):
    """Mean-variance objective <E|Y> - gamma * variance(Y) for any Y."""
    return inner_product(e.series, y) - gamma * portfolio_variance(sym, y)


def denormalize(y, v):
    """Raw holdings X(t) = Y(t)/sqrt(V(t)) on the observed grid."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0.0):
        raise NonPositiveVariance(
            f"variances must be positive; min is {float(np.min(v))!r}"
        )
    return y.slice(0, len(v) - 1).coefficients / np.sqrt(v)


def optimize(fac, e, gamma, trunc=None):
    """Unconstrained mean-variance optimum at risk aversion gamma.

    Returns the Allocation with normalized holdings (1/2 gamma) times the
    inverted expectation series, utility <E|applied>/(4 gamma), and raw
    holdings on the grid where variances were observed.
    """
    if not gamma > 0.0:
        raise InputError(f"gamma must be positive, got {gamma!r}")
    applied = apply_inverse(fac, e.series, trunc)
    quad = inner_product(e.series, applied)
    normalized = applied.scaled(1.0 / (2.0 * gamma))
    return Allocation(
        normalized=normalized,
        raw=denormalize(normalized, e.variances),
        utility=quad / (4.0 * gamma),
        variance=portfolio_variance(fac.symbol, normalized),
        expected_return=inner_product(e.series, normalized),
        gamma=gamma,
    )


def sum_to_one(alloc):
    """Rescale so the raw holdings sum to one.

    The unconstrained optimum is rescaled rather than re-optimized; the
    expected return scales linearly and the variance quadratically, and
    the risk-aversion field is replaced by the constraint tag.
    """
    total = float(np.sum(alloc.raw))
    if abs(total) < _ZERO_NET_TOL:
        raise ZeroNetPosition(
            f"net position {total!r} is too close to zero to rescale"
        )
    s = 1.0 / total
    return Allocation(
        normalized=alloc.normalized.scaled(s),
        raw=alloc.raw * s,
        utility=None,
        variance=alloc.variance * s * s,
        expected_return=alloc.expected_return * s,
        gamma=SUM_TO_ONE,
    )


def benchmark_uncorrelated(e, trunc=DEFAULT_TRUNCATION):
    """Sum-to-one allocation under the uncorrelated (identity) symbol.

    Raw weights come out proportional to ER(t)/V(t). The reported
    variance is the identity-symbol one, i.e. it ignores correlation by
    construction; realized comparisons belong to the backtest.
    """
    fac = identity_factorization(trunc)
    return sum_to_one(optimize(fac, e, gamma=0.5, trunc=trunc))


def ar1_closed_form(alpha, beta, e0, gamma):
    """Analytic optimum for C(tau) = alpha^tau and ER ratios E0 beta^t.

    Returns (yhat, u) with
        yhat = (e0/2 gamma) ((1 - alpha beta)/(1 - alpha^2))
               (1 - alpha z)/(1 - beta z)
        u    = (e0^2/4 gamma) (1 - alpha beta)^2
               / ((1 - alpha^2)(1 - beta^2)).
    Serves as the end-to-end oracle for the pipeline.
    """
    if not abs(alpha) < 1.0:
        raise InputError(f"alpha must be in (-1, 1), got {alpha!r}")
    if not abs(beta) < 1.0:
        raise InputError(f"beta must be in (-1, 1), got {beta!r}")
    if not gamma > 0.0:
        raise InputError(f"gamma must be positive, got {gamma!r}")
    k = (e0 / (2.0 * gamma)) * (1.0 - alpha * beta) / (1.0 - alpha**2)
    yhat = RationalFunction.from_polynomials(
        Polynomial([k, -k * alpha]), Polynomial([1.0, -beta])
    )
    u = (
        (e0**2 / (4.0 * gamma))
        * (1.0 - alpha * beta) ** 2
        / ((1.0 - alpha**2) * (1.0 - beta**2))
    )
    return yhat, u
