"""Correlation-by-maturity-lag estimation and rational fits.

The estimator standardizes each maturity's return history and averages
cross products over every (date, maturity) pair at a given maturity lag.
Rational fits compress the estimated sequence into a low-order function
of the lag generating variable, either by exact interpolation of the
leading coefficients or by least squares over a longer window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMaturity, InsufficientData, SingularSystem, UnstableFit
from .laurent import CIRCLE_GUARD, Polynomial, RationalFunction, expand_rational

# Re-expanding a classical fit must reproduce the input this tightly.
_INTERP_TOL = 1e-10


@dataclass(frozen=True)
class CorrelationEstimate:
    """Estimated correlation C(tau) for tau = 0..max_lag."""

    values: np.ndarray
    pair_counts: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        counts = np.asarray(self.pair_counts, dtype=int)
        if values.ndim != 1 or len(values) != len(counts):
            raise ValueError("values and pair_counts must be 1-d and aligned")
        if np.any(counts <= 0):
            raise InsufficientData("every lag needs at least one pair")
        if np.any(np.abs(values) > 1.05):
            raise ValueError("correlation estimate outside [-1.05, 1.05]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "pair_counts", counts)

    @property
    def max_lag(self):
        return len(self.values) - 1


@dataclass(frozen=True)
class PadeOrder:
    """Orders of a rational fit: numerator m, denominator n, k extra rows."""

    m: int
    n: int
    k: int = 0

    def __post_init__(self):
        if self.m < 0 or self.n < 1 or self.k < 0:
            raise ValueError("need m >= 0, n >= 1, k >= 0")

    @property
    def span(self):
        """Number of leading sequence values the fit consumes."""
        return self.m + self.n + self.k + 1


def estimate_correlation(panel, max_lag):
    """Average correlation of standardized returns at each maturity lag.

    Args:
        panel: ReturnPanel with a dates x maturities return matrix.
        max_lag: largest maturity difference to estimate.

    Returns:
        CorrelationEstimate with C(0) = 1 exactly and one value per lag.
    """
    returns = np.asarray(panel.returns, dtype=float)
    n_dates, n_mats = returns.shape
    if max_lag < 1:
        raise ValueError("max_lag must be at least 1")
    if n_dates < 2:
        raise InsufficientData(f"need at least 2 dates, got {n_dates}")
    if n_mats < max_lag + 2:
        raise InsufficientData(
            f"need at least max_lag + 2 = {max_lag + 2} maturities, got {n_mats}"
        )
    dead = np.nonzero(np.ptp(returns, axis=0) == 0.0)[0]
    if len(dead):
        raise DegenerateMaturity(
            f"maturity column {dead[0]} has zero return variance"
        )
    mean = returns.mean(axis=0)
    # population scaling so the lag-0 cross product averages to one
    std = returns.std(axis=0)
    standardized = (returns - mean) / std
    values = np.empty(max_lag + 1)
    counts = np.empty(max_lag + 1, dtype=int)
    values[0] = 1.0
    counts[0] = standardized.size
    for tau in range(1, max_lag + 1):
        prod = standardized[:, :-tau] * standardized[:, tau:]
        counts[tau] = prod.size
        values[tau] = prod.sum() / prod.size
    return CorrelationEstimate(values, counts)


def _denominator_rows(c, m, n, rows):
    """Matrix/rhs of sum_j q_j c[i-j] = -c[i] for i = m+1 .. m+rows."""
    c = np.asarray(c, dtype=float)
    mat = np.zeros((rows, n))
    rhs = np.zeros(rows)
    for r in range(rows):
        i = m + 1 + r
        rhs[r] = -c[i]
        for j in range(1, n + 1):
            if i - j >= 0:
                mat[r, j - 1] = c[i - j]
    return mat, rhs


def _numerator_from(c, q, m):
    p = np.zeros(m + 1)
    for i in range(m + 1):
        jmax = min(i, len(q) - 1)
        p[i] = np.dot(q[:jmax + 1], c[i::-1][:jmax + 1])
    return p


def _check_span(c, order):
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or len(c) < order.span:
        raise InsufficientData(
            f"order ({order.m}/{order.n}/{order.k}) needs {order.span} sequence "
            f"values, got {len(c)}"
        )
    return c


def circle_symbol_min(f, n_grid=4096):
    """min over a uniform circle grid of 2 Re f(e^{i theta}) - 1.

    A pole sitting exactly on a grid point makes the value non-finite;
    such points are dropped (the factorization guard rejects them later).
    """
    theta = 2.0 * np.pi * np.arange(n_grid) / n_grid
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = 2.0 * np.real(f(np.exp(1j * theta))) - 1.0
    finite = vals[np.isfinite(vals)]
    if len(finite) == 0:
        return float("-inf")
    return float(finite.min())


def _warn_if_not_positive(f):
    low = circle_symbol_min(f)
    if low < 0.0:
        warnings.warn(
            f"fitted correlation makes the circle symbol dip to {low:.4g}; "
            "factorization will reject it",
            RuntimeWarning,
            stacklevel=3,
        )


def pade_classical(c, order):
    """Rational [m/n] interpolant matching c[0..m+n] exactly.

    The denominator is normalized to q(0) = 1. Raises SingularSystem when
    the linear system is singular or the result fails to reproduce the
    input coefficients to 1e-10.
    """
    if order.k != 0:
        raise ValueError("classical interpolation takes k = 0")
    c = _check_span(c, order)
    m, n = order.m, order.n
    mat, rhs = _denominator_rows(c, m, n, rows=n)
    try:
        q_tail = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"[{m}/{n}] interpolation system is singular") from exc
    q = np.concatenate([[1.0], q_tail])
    p = _numerator_from(c, q, m)
    fit = RationalFunction.from_polynomials(Polynomial(p), Polynomial(q))
    back = expand_rational(fit, "plus", trunc=m + n).coefficients
    err = np.max(np.abs(back - c[:m + n + 1]))
    if not err <= _INTERP_TOL:
        raise SingularSystem(
            f"[{m}/{n}] interpolation is numerically rank-deficient "
            f"(re-expansion error {err:.3g})"
        )
    _warn_if_not_positive(fit)
    return fit


def pade_generalized(c, order):
    """Least-squares rational fit over the first m+n+k+1 sequence values.

    Minimizes the linearized objective || q * c - p ||^2 with q(0) = 1 via
    SVD least squares. With k = 0 this reproduces the classical
    interpolant. Raises UnstableFit when a denominator root lands in the
    unit-circle guard band, SingularSystem on rank deficiency.
    """
    c = _check_span(c, order)
    m, n, k = order.m, order.n, order.k
    mat, rhs = _denominator_rows(c, m, n, rows=n + k)
    q_tail, _, rank, _ = np.linalg.lstsq(mat, rhs, rcond=None)
    if rank < n:
        raise SingularSystem(
            f"[{m}/{n}/{k}] least-squares system has rank {rank} < {n}"
        )
    q = np.concatenate([[1.0], q_tail])
    p = _numerator_from(c, q, m)
    fit = RationalFunction.from_polynomials(Polynomial(p), Polynomial(q))
    radii = np.abs(fit.denominator_roots)
    banded = np.abs(radii - 1.0) < CIRCLE_GUARD
    if np.any(banded):
        raise UnstableFit(
            f"fitted denominator root {fit.denominator_roots[banded][0]:.8g} "
            "lies in the unit-circle guard band"
        )
    _warn_if_not_positive(fit)
    return fit


def fit_objective(c, fit, order):
    """Linearized residual sum of squares the generalized fit minimizes."""
    c = _check_span(c, order)
    q = fit.denominator.coefficients
    total = 0.0
    for i in range(order.m + 1, order.span):
        jmax = min(i, len(q) - 1)
        total += float(np.dot(q[:jmax + 1], c[i::-1][:jmax + 1])) ** 2
    return total
