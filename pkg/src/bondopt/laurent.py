"""Algebra of truncated Laurent series and real rational functions.

Portfolios and expectation profiles live in the Hilbert space of
square-summable coefficient sequences; everything here is a finite
two-sided truncation with float64 coefficients. Rational functions keep
a scale/root form alongside expanded polynomial coefficients so that
one-sided (Taylor-at-zero or at-infinity) expansions stay exact.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConvergenceFailure, PoleOnWrongSide

# Default one-sided truncation order for series work.
DEFAULT_TRUNCATION = 256

# Roots closer than this to |z| = 1 make inside/outside classification
# meaningless at double precision.
CIRCLE_GUARD = 1e-6

# Relative residual allowed when verifying companion-matrix roots.
ROOT_RESIDUAL_TOL = 1e-10

_PAIR_TOL = 1e-8


class LaurentSeries:
    """Finite series sum_i c[i] * z**(min_index + i), real coefficients."""

    __slots__ = ("coefficients", "min_index")

    def __init__(self, coefficients, min_index=0):
        arr = np.array(coefficients, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("need a one-dimensional, non-empty coefficient sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.setflags(write=False)
        self.coefficients = arr
        self.min_index = int(min_index)

    @property
    def max_index(self):
        return self.min_index + len(self.coefficients) - 1

    def coefficient(self, power):
        i = power - self.min_index
        if 0 <= i < len(self.coefficients):
            return float(self.coefficients[i])
        return 0.0

    def slice(self, lo, hi):
        """Restriction to powers lo..hi inclusive, zero-padded."""
        if hi < lo:
            raise ValueError("empty power range")
        out = np.zeros(hi - lo + 1)
        src_lo = max(lo, self.min_index)
        src_hi = min(hi, self.max_index)
        if src_lo <= src_hi:
            out[src_lo - lo:src_hi - lo + 1] = self.coefficients[
                src_lo - self.min_index:src_hi - self.min_index + 1
            ]
        return LaurentSeries(out, lo)

    def scaled(self, factor):
        return LaurentSeries(self.coefficients * float(factor), self.min_index)

    def trimmed(self):
        """Drop exact zeros at both edges; the zero series becomes [0] @ 0."""
        nz = np.nonzero(self.coefficients)[0]
        if len(nz) == 0:
            return LaurentSeries([0.0], 0)
        return LaurentSeries(
            self.coefficients[nz[0]:nz[-1] + 1], self.min_index + int(nz[0])
        )

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        a, b = self.trimmed(), other.trimmed()
        return a.min_index == b.min_index and np.array_equal(a.coefficients, b.coefficients)

    __hash__ = None

    def __repr__(self):
        return f"LaurentSeries(min_index={self.min_index}, len={len(self.coefficients)})"


def multiply(a, b, trunc=None):
    """Cauchy product of two series, optionally restricted to a power range.

    trunc is an inclusive (lo, hi) pair of powers; with trunc=None the full
    finite product is returned. Coefficients inside the requested range are
    exact for the given truncated inputs.
    """
    coeffs = np.convolve(a.coefficients, b.coefficients)
    product = LaurentSeries(coeffs, a.min_index + b.min_index)
    if trunc is None:
        return product
    lo, hi = trunc
    return product.slice(lo, hi)


def inner_product(a, b):
    """Sum over k of a_k * b_k (real scalar product)."""
    lo = max(a.min_index, b.min_index)
    hi = min(a.max_index, b.max_index)
    if hi < lo:
        return 0.0
    av = a.coefficients[lo - a.min_index:hi - a.min_index + 1]
    bv = b.coefficients[lo - b.min_index:hi - b.min_index + 1]
    return float(np.dot(av, bv))


def project_plus(a):
    """Orthogonal projection onto powers k >= 0."""
    if a.max_index < 0:
        return LaurentSeries([0.0], 0)
    return a.slice(max(a.min_index, 0), a.max_index)


class Polynomial:
    """Real polynomial with ascending coefficients, trailing zeros trimmed."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        arr = np.array(coefficients, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("need a one-dimensional, non-empty coefficient sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr = np.trim_zeros(arr, "b")
        if arr.size == 0:
            arr = np.zeros(1)
        arr.setflags(write=False)
        self.coefficients = arr

    @classmethod
    def from_roots(cls, roots_, scale=1.0):
        """scale * prod(z - r); roots must be closed under conjugation."""
        r = np.asarray(roots_, dtype=complex).ravel()
        if r.size == 0:
            return cls([float(scale)])
        c = npoly.polyfromroots(r) * scale
        imag = np.max(np.abs(c.imag))
        real = np.max(np.abs(c.real))
        if imag > 1e-8 * max(1.0, real):
            raise ValueError("roots are not closed under conjugation")
        return cls(c.real)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coefficients[0] == 0.0

    @property
    def leading(self):
        return float(self.coefficients[-1])

    def __call__(self, z):
        return npoly.polyval(z, self.coefficients)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.coefficients, other.coefficients))
        return Polynomial(self.coefficients * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return Polynomial(npoly.polyadd(self.coefficients, other.coefficients))

    def __sub__(self, other):
        return Polynomial(npoly.polysub(self.coefficients, other.coefficients))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coefficients, other.coefficients)

    __hash__ = None

    def __repr__(self):
        return f"Polynomial({list(self.coefficients)})"


def _symmetrize_conjugates(r):
    """Snap companion-matrix output to an exactly conjugate-closed set."""
    out = []
    uppers = []
    lowers = []
    for root in r:
        tol = _PAIR_TOL * (1.0 + abs(root))
        if abs(root.imag) <= tol:
            out.append(complex(root.real, 0.0))
        elif root.imag > 0:
            uppers.append(root)
        else:
            lowers.append(root)
    for up in uppers:
        if not lowers:
            out.append(up)  # unpaired; residual check decides
            continue
        j = int(np.argmin([abs(lo - np.conj(up)) for lo in lowers]))
        lo = lowers.pop(j)
        re = 0.5 * (up.real + lo.real)
        im = 0.5 * (up.imag - lo.imag)
        out.append(complex(re, im))
        out.append(complex(re, -im))
    out.extend(lowers)
    return np.array(sorted(out, key=lambda x: (x.real, x.imag)), dtype=complex)


def roots(p):
    """Roots of p via companion-matrix eigenvalues, conjugate-symmetrized.

    Raises ConvergenceFailure when a reported root does not reproduce a
    small polynomial residual (scaled by root magnitude).
    """
    if p.is_zero:
        raise ValueError("zero polynomial has no well-defined roots")
    if p.degree == 0:
        return np.array([], dtype=complex)
    r = npoly.polyroots(p.coefficients)
    r = _symmetrize_conjugates(r)
    norm = float(np.linalg.norm(p.coefficients))
    for root in r:
        scale = norm * max(1.0, abs(root)) ** p.degree
        if abs(p(root)) > ROOT_RESIDUAL_TOL * scale:
            raise ConvergenceFailure(
                f"root {root:.6g} of degree-{p.degree} polynomial has residual "
                f"{abs(p(root)):.3g} (allowed {ROOT_RESIDUAL_TOL * scale:.3g})"
            )
    return r


def _check_conjugate_closed(r):
    r = np.asarray(r, dtype=complex)
    unmatched = list(r[np.abs(r.imag) > _PAIR_TOL * (1.0 + np.abs(r))])
    while unmatched:
        root = unmatched.pop()
        tol = _PAIR_TOL * (1.0 + abs(root))
        j = next(
            (i for i, other in enumerate(unmatched) if abs(other - np.conj(root)) <= tol),
            None,
        )
        if j is None:
            raise ValueError(f"root {root} has no conjugate partner")
        unmatched.pop(j)


class RationalFunction:
    """scale * prod(z - zero_i) / prod(z - pole_j) with real coefficients.

    Carries both the root/scale form and expanded numerator/denominator
    polynomials. Both root multisets must be closed under conjugation.
    """

    __slots__ = ("scale", "numerator_roots", "denominator_roots", "numerator", "denominator")

    def __init__(self, scale, numerator_roots=(), denominator_roots=(),
                 _numerator=None, _denominator=None):
        nr = np.asarray(numerator_roots, dtype=complex).ravel()
        dr = np.asarray(denominator_roots, dtype=complex).ravel()
        _check_conjugate_closed(nr)
        _check_conjugate_closed(dr)
        self.scale = float(scale)
        self.numerator_roots = nr
        self.denominator_roots = dr
        self.numerator = _numerator if _numerator is not None else Polynomial.from_roots(nr, self.scale)
        self.denominator = _denominator if _denominator is not None else Polynomial.from_roots(dr, 1.0)
        if self.denominator.is_zero:
            raise ValueError("denominator is identically zero")

    @classmethod
    def from_polynomials(cls, numerator, denominator):
        """Build from explicit polynomials, keeping them exactly as given."""
        if denominator.is_zero:
            raise ValueError("denominator is identically zero")
        nr = roots(numerator) if not numerator.is_zero else np.array([], dtype=complex)
        dr = roots(denominator)
        scale = 0.0 if numerator.is_zero else numerator.leading / denominator.leading
        return cls(scale, nr, dr, _numerator=numerator, _denominator=denominator)

    @classmethod
    def constant(cls, value):
        return cls(float(value))

    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)

    def __repr__(self):
        return (
            f"RationalFunction(scale={self.scale!r}, "
            f"zeros={len(self.numerator_roots)}, poles={len(self.denominator_roots)})"
        )


def _taylor(num, den, trunc):
    """Taylor coefficients 0..trunc of num(z)/den(z); needs den[0] != 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if den[0] == 0.0:
        raise ValueError("expansion point is a pole")
    c = np.zeros(trunc + 1)
    d0 = den[0]
    for k in range(trunc + 1):
        acc = num[k] if k < len(num) else 0.0
        jmax = min(k, len(den) - 1)
        if jmax >= 1:
            acc -= np.dot(den[1:jmax + 1], c[k - 1::-1][:jmax])
        c[k] = acc / d0
    return c


def expand_rational(f, direction, trunc=DEFAULT_TRUNCATION):
    """One-sided expansion of a rational function.

    direction "plus": Taylor series at z = 0, powers 0..trunc; every pole
    must lie strictly outside the unit circle. direction "minus": expansion
    at infinity in powers 0..-trunc; every pole must lie strictly inside,
    and the function must stay bounded at infinity.
    """
    if trunc < 0:
        raise ValueError("trunc must be non-negative")
    poles = f.denominator_roots
    num = f.numerator.coefficients
    den = f.denominator.coefficients
    if direction == "plus":
        bad = poles[np.abs(poles) <= 1.0]
        if len(bad):
            raise PoleOnWrongSide(
                f"plus expansion needs all poles outside the unit circle; found {bad[0]:.6g}"
            )
        return LaurentSeries(_taylor(num, den, trunc), 0)
    if direction == "minus":
        bad = poles[np.abs(poles) >= 1.0]
        if len(bad):
            raise PoleOnWrongSide(
                f"minus expansion needs all poles inside the unit circle; found {bad[0]:.6g}"
            )
        deg_gap = (len(den) - 1) - (len(num) - 1)
        if deg_gap < 0:
            raise PoleOnWrongSide("function grows at infinity; no minus expansion")
        # substitute w = 1/z: f(1/w) = w**deg_gap * rev(num) / rev(den)
        num_w = np.concatenate([np.zeros(deg_gap), num[::-1]])
        den_w = den[::-1]
        c = _taylor(num_w, den_w, trunc)
        return LaurentSeries(c[::-1], -trunc)
    raise ValueError(f"unknown direction {direction!r}")
