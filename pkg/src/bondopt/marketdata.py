"""Yield curve files, spline interpolation, and return panels.

Curves are quoted as continuously compounded decimal yields by tenor in
years. Zero-coupon prices follow P = exp(-y * t). A holding-period
return over one month is the log price change of a bond whose maturity
shrinks by one month; maturities are handled on a monthly grid with
months / 12 converting to years.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date as _date

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DegenerateMaturity,
    DuplicateDate,
    EmptyInput,
    GridOutOfRange,
    InputError,
    InsufficientDates,
    NonMonotoneTenors,
    ParseError,
)

_LONG_HEADER = ["date", "tenor_years", "yield"]


@dataclass(frozen=True)
class YieldCurve:
    """One dated curve: strictly increasing positive tenors in years."""

    date: str
    tenors: np.ndarray
    yields: np.ndarray

    def __post_init__(self):
        tenors = np.asarray(self.tenors, dtype=float)
        yields = np.asarray(self.yields, dtype=float)
        if tenors.ndim != 1 or tenors.shape != yields.shape:
            raise InputError("tenors and yields must be aligned 1-d arrays")
        if len(tenors) == 0:
            raise EmptyInput("curve has no quotes")
        if not np.all(np.isfinite(tenors)) or not np.all(np.isfinite(yields)):
            raise InputError(f"non-finite quote on {self.date}")
        if tenors[0] <= 0.0 or np.any(np.diff(tenors) <= 0.0):
            raise NonMonotoneTenors(
                f"tenors on {self.date} must be positive and strictly increasing"
            )
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "yields", yields)


@dataclass(frozen=True)
class ReturnPanel:
    """Monthly log returns: rows are realization dates, columns maturities."""

    dates: tuple
    maturities: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        maturities = np.asarray(self.maturities, dtype=int)
        returns = np.asarray(self.returns, dtype=float)
        if returns.ndim != 2:
            raise InputError("returns must be a 2-d matrix")
        if returns.shape != (len(self.dates), len(maturities)):
            raise InputError("panel shape does not match its labels")
        if not np.all(np.isfinite(returns)):
            raise InputError("returns must be finite")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "maturities", maturities)
        object.__setattr__(self, "returns", returns)

    @property
    def means(self):
        return self.returns.mean(axis=0)

    @property
    def stds(self):
        return self.returns.std(axis=0, ddof=1)


def _parse_date(token, line):
    token = token.strip()
    try:
        _date.fromisoformat(token)
    except ValueError as exc:
        raise ParseError(f"bad ISO date {token!r}", line=line) from exc
    return token


def _parse_float(token, line, what):
    try:
        return float(token)
    except ValueError as exc:
        raise ParseError(f"bad {what} {token.strip()!r}", line=line) from exc


def parse_curves(text):
    """Parse curve CSV text; auto-detects long and wide layouts."""
    reader = csv.reader(io.StringIO(text))
    rows = [(i, row) for i, row in enumerate(reader, start=1) if any(t.strip() for t in row)]
    if not rows:
        raise EmptyInput("no rows in curve input")
    header_line, header = rows[0]
    header = [h.strip().lower() for h in header]
    body = rows[1:]
    if not body:
        raise EmptyInput("no data rows in curve input")
    if header == _LONG_HEADER:
        return _parse_long(body)
    if len(header) >= 2 and header[0] == "date" and all(h.startswith("y_") for h in header[1:]):
        return _parse_wide(header, header_line, body)
    raise ParseError(
        "expected 'date,tenor_years,yield' or wide 'date,y_<tenor>,...' header",
        line=header_line,
    )


def _parse_long(body):
    quotes = {}
    for line, row in body:
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=line)
        day = _parse_date(row[0], line)
        tenor = _parse_float(row[1], line, "tenor")
        value = _parse_float(row[2], line, "yield")
        per_day = quotes.setdefault(day, {})
        if tenor in per_day:
            raise DuplicateDate(f"duplicate quote for {day} at tenor {tenor}")
        per_day[tenor] = value
    curves = []
    for day in sorted(quotes):
        tenors = np.array(sorted(quotes[day]))
        yields = np.array([quotes[day][t] for t in tenors])
        curves.append(YieldCurve(day, tenors, yields))
    return curves


def _parse_wide(header, header_line, body):
    tenors = []
    for name in header[1:]:
        try:
            tenors.append(float(name[2:]))
        except ValueError as exc:
            raise ParseError(f"bad tenor column {name!r}", line=header_line) from exc
    tenors = np.array(tenors)
    if tenors[0] <= 0.0 or np.any(np.diff(tenors) <= 0.0):
        raise NonMonotoneTenors("wide header tenors must be positive and increasing")
    seen = {}
    for line, row in body:
        if len(row) != len(tenors) + 1:
            raise ParseError(f"expected {len(tenors) + 1} columns, got {len(row)}", line=line)
        day = _parse_date(row[0], line)
        if day in seen:
            raise DuplicateDate(f"date {day} appears on lines {seen[day][0]} and {line}")
        yields = np.array([_parse_float(tok, line, "yield") for tok in row[1:]])
        seen[day] = (line, YieldCurve(day, tenors, yields))
    return [seen[day][1] for day in sorted(seen)]


def load_curves(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_curves(fh.read())


def spline_interpolate(curve, grid_months):
    """Natural cubic spline of the curve at the given monthly maturities.

    Never extrapolates: any target outside the quoted tenor range raises
    GridOutOfRange.
    """
    months = np.asarray(grid_months, dtype=int)
    if len(curve.tenors) < 2:
        raise InputError(f"curve {curve.date} needs at least two knots to interpolate")
    targets = months / 12.0
    lo, hi = curve.tenors[0], curve.tenors[-1]
    if np.any(targets < lo - 1e-12) or np.any(targets > hi + 1e-12):
        raise GridOutOfRange(
            f"maturity grid [{targets.min():.4f}, {targets.max():.4f}]y leaves the "
            f"quoted range [{lo:.4f}, {hi:.4f}]y on {curve.date}"
        )
    spline = CubicSpline(curve.tenors, curve.yields, bc_type="natural")
    return YieldCurve(curve.date, targets, spline(targets))


def _log_prices(curve, grid_months):
    """log P at the monthly maturities, with log P(0) = 0 for cash."""
    months = np.asarray(grid_months, dtype=int)
    live = months[months > 0]
    interp = spline_interpolate(curve, live)
    out = dict(zip(live.tolist(), (-interp.yields * live / 12.0).tolist()))
    if np.any(months == 0):
        out[0] = 0.0
    return out


def _validate_grid(grid_months):
    months = np.asarray(grid_months, dtype=int)
    if months.ndim != 1 or len(months) == 0:
        raise InputError("maturity grid must be a non-empty 1-d integer sequence")
    if months[0] < 1 or np.any(np.diff(months) <= 0):
        raise InputError("maturity grid must be strictly increasing months >= 1")
    return months


def compute_returns(curves, grid_months):
    """Panel of one-month log returns on the maturity grid.

    The return realized at date s+1 for maturity t months is
    log P(t - 1 month, s+1) - log P(t, s); a 1-month bond matures into
    cash, so its next-period price is 1.
    """
    months = _validate_grid(grid_months)
    if len(curves) < 2:
        raise InsufficientDates(f"need at least 2 curve dates, got {len(curves)}")
    curves = sorted(curves, key=lambda c: c.date)
    for prev, cur in zip(curves, curves[1:]):
        if prev.date == cur.date:
            raise DuplicateDate(f"date {cur.date} appears twice")
    needed = np.unique(np.concatenate([months, months - 1]))
    prices = [_log_prices(c, needed) for c in curves]
    rows = []
    for s in range(len(curves) - 1):
        cur, nxt = prices[s], prices[s + 1]
        rows.append([nxt[m - 1] - cur[m] for m in months.tolist()])
    return ReturnPanel(
        dates=tuple(c.date for c in curves[1:]),
        maturities=months,
        returns=np.array(rows),
    )


def expected_returns_static(curve, grid_months):
    """Expected one-month log returns if the curve stays frozen."""
    months = _validate_grid(grid_months)
    prices = _log_prices(curve, np.unique(np.concatenate([months, months - 1])))
    return np.array([prices[m - 1] - prices[m] for m in months.tolist()])


def variance_estimates(panel):
    """Unbiased per-maturity return variances (n - 1 denominator)."""
    if panel.returns.shape[0] < 2:
        raise InsufficientDates("variance needs at least two return rows")
    var = panel.returns.var(axis=0, ddof=1)
    dead = np.nonzero(np.ptp(panel.returns, axis=0) == 0.0)[0]
    if len(dead):
        raise DegenerateMaturity(
            f"maturity {int(panel.maturities[dead[0]])}m has zero return variance"
        )
    return var
