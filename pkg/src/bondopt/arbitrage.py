"""Arbitrage diagnostics on the correlation symbol.

Three separate questions, three checks:

  * invertibility of the multiplication operator: the circle range of A
    must exclude 0 (up to a guard scaled to the symbol size);
  * classical arbitrage: a zero-risk portfolio is a kernel vector of the
    truncated symbol matrix; arbitrage requires expectations to have a
    component along it;
  * near-arbitrage: the quadratic form q = <E|[P+ A x]^-1 E> measures how
    much utility per unit risk aversion the curve offers; values above a
    user-chosen threshold flag suspicious expectations (the threshold is
    an economic input, not a property of the data; the report always
    carries q itself).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .laurent import inner_product
from .wienerhopf import apply_inverse, toeplitz_matrix

KERNEL_MAX_ORDER = 1024

_SIGMA_TOL = 1e-8
_ORTH_TOL = 1e-6

ABSENT = "absent"
PRESENT = "present"
NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class KernelVerdict:
    classical_arbitrage: str
    kernel_dimension: int
    max_overlap: float


@dataclass(frozen=True)
class ArbitrageReport:
    invertible: bool
    circle_interval: tuple[float, float]
    kernel_dimension_estimate: int
    classical_arbitrage: str
    quadratic_form: float | None
    threshold: float
    near_arbitrage: bool


def invertibility_check(sym):
    """Whether 0 lies outside the symbol's circle range, with guard."""
    lo, hi = sym.circle_min, sym.circle_max
    guard = 1e-9 * (1.0 + abs(hi))
    invertible = not (lo - guard <= 0.0 <= hi + guard)
    return invertible, (lo, hi)


def kernel_orthogonality(sym, e, trunc=512):
    """Classical-arbitrage verdict via the kernel of the truncated symbol.

    An invertible symbol has a trivial kernel, so the verdict is absent
    without any linear algebra. Otherwise the kernel is approximated by
    the singular vectors of the trunc x trunc symbol matrix below
    sigma_tol, and arbitrage is present iff expectations overlap one.
    """
    if trunc > KERNEL_MAX_ORDER:
        raise InputError(
            f"kernel check order {trunc} exceeds the cap {KERNEL_MAX_ORDER}"
        )
    invertible, _ = invertibility_check(sym)
    if invertible:
        return KernelVerdict(ABSENT, 0, 0.0)
    matrix = toeplitz_matrix(sym, trunc)
    _, sigma, vt = np.linalg.svd(matrix, hermitian=True)
    near_null = sigma < _SIGMA_TOL * sigma[0]
    dimension = int(np.count_nonzero(near_null))
    if dimension == 0:
        # no resolvable kernel at this truncation; nothing to overlap with
        return KernelVerdict(ABSENT, 0, 0.0)
    evec = e.series.slice(0, trunc - 1).coefficients
    norm = float(np.linalg.norm(evec))
    if norm == 0.0:
        return KernelVerdict(ABSENT, dimension, 0.0)
    overlaps = np.abs(vt[near_null] @ evec)
    max_overlap = float(np.max(overlaps))
    verdict = PRESENT if max_overlap > _ORTH_TOL * norm else ABSENT
    return KernelVerdict(verdict, dimension, max_overlap)


def near_arbitrage(fac, e, threshold, trunc=None):
    """Quadratic form q = <E|applied E> and whether it crosses threshold.

    q equals 4 gamma times the optimal utility, so it depends on the rate
    structure alone, not on risk aversion.
    """
    if not threshold > 0.0:
        raise InputError(f"threshold must be positive, got {threshold!r}")
    applied = apply_inverse(fac, e.series, trunc)
    q = inner_product(e.series, applied)
    return q > threshold, q


def build_report(sym, e=None, fac=None, threshold=2.0, trunc=512):
    """Assemble the full diagnostic report.

    Without expectations the kernel and quadratic-form checks have no
    input, so the classical verdict is not-applicable and q is None. A
    non-invertible symbol has no factorization, so q is None there too.
    """
    invertible, interval = invertibility_check(sym)
    q = None
    crossed = False
    if e is None:
        kernel = KernelVerdict(NOT_APPLICABLE, 0, 0.0)
    else:
        kernel = kernel_orthogonality(sym, e, min(trunc, KERNEL_MAX_ORDER))
        if fac is not None and invertible:
            crossed, q = near_arbitrage(fac, e, threshold)
    return ArbitrageReport(
        invertible=invertible,
        circle_interval=(float(interval[0]), float(interval[1])),
        kernel_dimension_estimate=kernel.kernel_dimension,
        classical_arbitrage=kernel.classical_arbitrage,
        quadratic_form=None if q is None else float(q),
        threshold=float(threshold),
        near_arbitrage=bool(crossed),
    )
