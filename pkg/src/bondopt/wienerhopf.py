"""Spectral symbol construction and its multiplicative factorization.

The symbol A(z) = C(z) + C(1/z) - 1 of a correlation generating function
C is real on the unit circle and symmetric under z -> 1/z, so its zeros
and poles come in reciprocal pairs. Splitting them by the unit circle
yields the two one-sided factors directly as rational functions:

    exp(-A_plus)(z)  = prod(z - eta_out) / (a0 * prod(z - theta_out))
    exp(-A_minus)(z) = prod(z - eta_in) / prod(z - theta_in)

where theta are zeros, eta are poles of A and a0 its leading scale. This
avoids taking any numerical logarithm of A, so no branch tracking is
needed. The inverse of the projected multiplication operator acts as

    y = exp(-A_plus) x P_plus [ exp(-A_minus) x e ]

realized here on truncated series. A dense Toeplitz solve of the same
system serves as an independent cross-check, not as the implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz as _scipy_toeplitz
from scipy.optimize import minimize_scalar

from .errors import (
    InputError,
    NonPositiveSymbol,
    NotNormalized,
    NumericalError,
    PoleOnCircle,
    PoleOnWrongSide,
    RootOnCircle,
    SingularMatrix,
)
from .laurent import (
    CIRCLE_GUARD,
    DEFAULT_TRUNCATION,
    LaurentSeries,
    Polynomial,
    RationalFunction,
    expand_rational,
    multiply,
    project_plus,
)

CIRCLE_GRID = 4096

# Dense cross-check matrices beyond this order are out of contract.
MAX_ORACLE_ORDER = 2048

_PRODUCT_IDENTITY_TOL = 1e-8


@dataclass(frozen=True)
class SymbolSpectrum:
    """Rational symbol with its Laurent truncation and circle range."""

    rational: RationalFunction
    laurent: LaurentSeries
    circle_min: float
    circle_max: float

    @property
    def truncation(self):
        return self.laurent.max_index


@dataclass(frozen=True)
class Factorization:
    """One-sided factors of 1/A with their truncated expansions."""

    symbol: SymbolSpectrum
    exp_minus_plus: RationalFunction
    exp_minus_minus: RationalFunction
    plus_expansion: LaurentSeries
    minus_expansion: LaurentSeries
    scale: float

    @property
    def truncation(self):
        return self.plus_expansion.max_index


def _reverse_pad(poly, order):
    """Coefficients of z**order * p(1/z)."""
    c = poly.coefficients
    out = np.zeros(order + 1)
    out[order - (len(c) - 1):] = c[::-1]
    return Polynomial(out)


def _trim_leading_dust(poly, rel=1e-13):
    """Drop top coefficients that are pure rounding residue."""
    c = poly.coefficients
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return poly
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= rel * scale:
        k -= 1
    return Polynomial(c[:k])


def _refined_extremum(fun, grid_theta, grid_vals, kind):
    """Best circle value near the grid extremum, one bracketed refinement."""
    sign = 1.0 if kind == "min" else -1.0
    i = int(np.argmin(sign * grid_vals))
    step = grid_theta[1] - grid_theta[0]
    lo, hi = grid_theta[i] - step, grid_theta[i] + step
    res = minimize_scalar(
        lambda t: sign * float(fun(np.array([t]))[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    best = min(sign * grid_vals[i], res.fun)
    return sign * best


def _circle_range(fun):
    theta = 2.0 * np.pi * np.arange(CIRCLE_GRID) / CIRCLE_GRID
    vals = fun(theta)
    if not np.all(np.isfinite(vals)):
        raise PoleOnCircle("symbol evaluates non-finite on the unit circle")
    return (
        _refined_extremum(fun, theta, vals, "min"),
        _refined_extremum(fun, theta, vals, "max"),
    )


def build_symbol(chat, trunc=DEFAULT_TRUNCATION):
    """Symbol A(z) = chat(z) + chat(1/z) - 1 of a correlation function.

    Args:
        chat: RationalFunction generating the correlations, C(0) = 1.
        trunc: one-sided Laurent truncation order.

    Returns:
        SymbolSpectrum with exact coefficient symmetry A_k = A_{-k}.

    Raises PoleOnCircle for poles in the unit-circle guard band,
    PoleOnWrongSide for poles inside the disk (the generating function
    must be analytic on |z| <= 1), NotNormalized when C(0) is not 1.
    """
    if trunc < 1:
        raise InputError("trunc must be at least 1")
    radii = np.abs(chat.denominator_roots)
    if np.any(np.abs(radii - 1.0) < CIRCLE_GUARD):
        raise PoleOnCircle(
            "correlation generating function has a pole in the unit-circle guard band"
        )
    if np.any(radii < 1.0):
        raise PoleOnWrongSide(
            "correlation generating function must be analytic on the closed "
            "unit disk; found a pole inside (non-summable correlation model)"
        )
    c0 = float(chat.numerator(0.0) / chat.denominator(0.0))
    if abs(c0 - 1.0) > 1e-6:
        raise NotNormalized(f"C(0) = {c0!r}, expected 1")

    plus = expand_rational(chat, "plus", trunc).coefficients
    two_sided = np.concatenate([plus[:0:-1], [2.0 * plus[0] - 1.0], plus[1:]])
    laurent = LaurentSeries(two_sided, -trunc)

    p, q = chat.numerator, chat.denominator
    order = max(p.degree, q.degree)
    p_rev = _reverse_pad(p, order)
    q_rev = _reverse_pad(q, order)
    numerator = _trim_leading_dust(p * q_rev + p_rev * q - q * q_rev)
    denominator = _trim_leading_dust(q * q_rev)
    rational = RationalFunction.from_polynomials(numerator, denominator)

    def on_circle(theta):
        return 2.0 * np.real(chat(np.exp(1j * theta))) - 1.0

    lo, hi = _circle_range(on_circle)
    return SymbolSpectrum(rational, laurent, lo, hi)


def symbol_from_rational(rational, trunc=DEFAULT_TRUNCATION):
    """Symbol given directly as a rational function of z, scaled to A_0 = 1.

    Laurent coefficients come from an FFT over the circle, which is exact
    to rounding once the grid outruns the geometric decay of the
    coefficients. Intended for directly constructed (e.g. random test)
    symbols; fitted correlations should go through build_symbol.
    """
    radii = np.concatenate([
        np.abs(rational.numerator_roots), np.abs(rational.denominator_roots)
    ])
    if np.any(np.abs(radii - 1.0) < CIRCLE_GUARD):
        raise RootOnCircle("symbol has a zero or pole in the unit-circle guard band")
    n = 1
    while n < max(8 * trunc, 2 * CIRCLE_GRID):
        n *= 2
    theta = 2.0 * np.pi * np.arange(n) / n
    raw = rational(np.exp(1j * theta))
    # real on the circle <=> symmetric under z -> 1/z, which the split relies on
    if np.max(np.abs(raw.imag)) > 1e-9 * max(float(np.max(np.abs(raw))), 1.0):
        raise InputError(
            "symbol must be real on the unit circle (symmetric under z -> 1/z)"
        )
    vals = raw.real
    spectrum = np.fft.fft(vals) / n
    coeffs = np.empty(2 * trunc + 1)
    coeffs[trunc] = spectrum[0].real
    for k in range(1, trunc + 1):
        symmetric = 0.5 * (spectrum[k] + spectrum[n - k]).real
        coeffs[trunc + k] = symmetric
        coeffs[trunc - k] = symmetric
    center = coeffs[trunc]
    if center <= 0.0:
        raise InputError(f"cannot normalize: A_0 = {center!r} is not positive")
    scaled = RationalFunction(
        rational.scale / center, rational.numerator_roots, rational.denominator_roots
    )

    def on_circle(th):
        return np.real(scaled(np.exp(1j * th)))

    lo, hi = _circle_range(on_circle)
    return SymbolSpectrum(scaled, LaurentSeries(coeffs / center, -trunc), lo, hi)


def _split_by_circle(values, what):
    radii = np.abs(values)
    banded = np.abs(radii - 1.0) < CIRCLE_GUARD
    if np.any(banded):
        raise RootOnCircle(
            f"symbol {what} {values[banded][0]:.8g} lies in the unit-circle guard band"
        )
    return values[radii < 1.0], values[radii > 1.0]


def factorize(sym):
    """Wiener-Hopf split of the symbol into its one-sided factors.

    Classifies the zeros and poles of A by the unit circle and assembles
    exp(-A_plus) and exp(-A_minus) from the two groups, together with
    their truncated one-sided expansions. Verifies the product identity
    exp(-A_plus) * exp(-A_minus) * A = 1 on 64 circle points.
    """
    zeros_in, zeros_out = _split_by_circle(sym.rational.numerator_roots, "zero")
    poles_in, poles_out = _split_by_circle(sym.rational.denominator_roots, "pole")
    if sym.circle_min <= 0.0:
        raise NonPositiveSymbol(
            f"symbol minimum on the circle is {sym.circle_min!r}; need > 0"
        )
    trunc = sym.truncation
    a0 = sym.rational.scale
    plus_factor = RationalFunction(1.0 / a0, poles_out, zeros_out)
    minus_factor = RationalFunction(1.0, poles_in, zeros_in)
    plus_expansion = expand_rational(plus_factor, "plus", trunc)
    minus_expansion = expand_rational(minus_factor, "minus", trunc)

    z = np.exp(2j * np.pi * np.arange(64) / 64)
    residual = np.max(np.abs(plus_factor(z) * minus_factor(z) * sym.rational(z) - 1.0))
    if not residual <= _PRODUCT_IDENTITY_TOL:
        raise NumericalError(
            f"factor product identity violated: residual {residual:.3g}"
        )
    return Factorization(
        symbol=sym,
        exp_minus_plus=plus_factor,
        exp_minus_minus=minus_factor,
        plus_expansion=plus_expansion,
        minus_expansion=minus_expansion,
        scale=a0,
    )


def identity_factorization(trunc=DEFAULT_TRUNCATION):
    """Factorization of the trivial symbol A = 1 (uncorrelated returns)."""
    return factorize(build_symbol(RationalFunction.constant(1.0), trunc))


def apply_inverse(fac, e, trunc=None):
    """Inverse of the projected multiplication operator applied to e.

    Computes exp(-A_plus) x P_plus [ exp(-A_minus) x e ] truncated to
    powers 0..trunc. e must be supported on non-negative powers.
    """
    if e.min_index < 0:
        raise InputError("e must be supported on non-negative powers")
    if trunc is None:
        trunc = fac.truncation
    if trunc > fac.truncation:
        raise InputError(
            f"trunc {trunc} exceeds the factorization truncation {fac.truncation}"
        )
    inner = multiply(fac.minus_expansion, e)
    projected = project_plus(inner)
    return multiply(fac.plus_expansion, projected, trunc=(0, trunc))


def toeplitz_matrix(sym, order):
    """Dense order x order matrix M_ij = A_{i-j} from the symbol."""
    if order < 1:
        raise InputError("order must be positive")
    if order > MAX_ORACLE_ORDER:
        raise InputError(f"order {order} exceeds the dense cap {MAX_ORACLE_ORDER}")
    if order - 1 > sym.truncation:
        raise InputError(
            f"order {order} needs Laurent lags up to {order - 1}, symbol has "
            f"{sym.truncation}"
        )
    column = np.array([sym.laurent.coefficient(k) for k in range(order)])
    return _scipy_toeplitz(column)


def toeplitz_solve_oracle(sym, e, trunc):
    """Ground-truth solve of sum_j A_{i-j} y_j = e_i by dense factorization.

    Deliberately independent of the Wiener-Hopf route; used to cross-check
    apply_inverse on moderate truncations.
    """
    if e.min_index < 0:
        raise InputError("e must be supported on non-negative powers")
    matrix = toeplitz_matrix(sym, trunc)
    rhs = e.slice(0, trunc - 1).coefficients
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"dense symbol matrix of order {trunc} is singular") from exc
    residual = np.max(np.abs(matrix @ solution - rhs))
    bound = 1e-8 * (np.linalg.norm(matrix, np.inf) * np.linalg.norm(solution, np.inf)
                    + np.linalg.norm(rhs, np.inf))
    if not residual <= max(bound, 1e-300):
        raise SingularMatrix(
            f"dense solve residual {residual:.3g} indicates near-singularity"
        )
    return LaurentSeries(solution, 0)
