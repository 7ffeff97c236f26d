"""Invertibility, kernel-orthogonality, and near-arbitrage verdicts."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bondopt.arbitrage import (
    ABSENT,
    NOT_APPLICABLE,
    PRESENT,
    build_report,
    invertibility_check,
    kernel_orthogonality,
    near_arbitrage,
)
from bondopt.errors import InputError
from bondopt.laurent import Polynomial, RationalFunction
from bondopt.portfolio import normalize_expectations
from bondopt.wienerhopf import (
    build_symbol,
    factorize,
    identity_factorization,
    toeplitz_matrix,
)


def ar1_generating(alpha):
    return RationalFunction(-1.0 / alpha, [], [1.0 / alpha])


def degenerate_symbol(trunc=512):
    """C(z) = 1 + 2z/3 + z^2/6 gives A = (2 + z + 1/z)^2 / 6: a fourth

    order zero at z = -1, so the truncated matrices have singular values
    decaying like T^-4 and the operator is not invertible.
    """
    chat = RationalFunction.from_polynomials(
        Polynomial([1.0, 2.0 / 3.0, 1.0 / 6.0]), Polynomial([1.0])
    )
    return build_symbol(chat, trunc=trunc)


def geometric_expectations(beta, n=257, e0=1.0):
    er = e0 * beta ** np.arange(n, dtype=float)
    return normalize_expectations(er, np.ones(n))


class TestInvertibility:
    def test_ar1_interval_and_verdict(self):
        ok, (lo, hi) = invertibility_check(build_symbol(ar1_generating(0.5)))
        assert ok
        assert_allclose(lo, 1.0 / 3.0, atol=1e-9)
        assert_allclose(hi, 3.0, atol=1e-9)

    def test_identity_symbol(self):
        ok, (lo, hi) = invertibility_check(identity_factorization(8).symbol)
        assert ok
        assert_allclose([lo, hi], [1.0, 1.0], atol=1e-12)

    def test_symbol_touching_zero(self):
        ok, (lo, hi) = invertibility_check(degenerate_symbol(trunc=16))
        assert not ok
        assert abs(lo) <= 1e-12
        assert_allclose(hi, 8.0 / 3.0, atol=1e-9)


class TestKernelOrthogonality:
    def test_invertible_symbol_is_absent_without_svd(self):
        sym = build_symbol(ar1_generating(0.5))
        verdict = kernel_orthogonality(sym, geometric_expectations(0.25), trunc=256)
        assert verdict.classical_arbitrage == ABSENT
        assert verdict.kernel_dimension == 0

    def test_degenerate_symbol_kernel_is_resolved(self):
        sym = degenerate_symbol()
        verdict = kernel_orthogonality(sym, geometric_expectations(0.5, n=512), 512)
        assert verdict.kernel_dimension >= 1

    def test_expectations_in_kernel_flag_present(self):
        sym = degenerate_symbol()
        matrix = toeplitz_matrix(sym, 512)
        _, sigma, vt = np.linalg.svd(matrix, hermitian=True)
        kernel_vec = vt[-1]
        e = normalize_expectations(kernel_vec, np.ones(512))
        verdict = kernel_orthogonality(sym, e, 512)
        assert verdict.classical_arbitrage == PRESENT
        assert verdict.max_overlap > 0.99

    def test_orthogonal_expectations_stay_absent(self):
        sym = degenerate_symbol()
        matrix = toeplitz_matrix(sym, 512)
        _, sigma, vt = np.linalg.svd(matrix, hermitian=True)
        null_basis = vt[sigma < 1e-8 * sigma[0]]
        er = 0.5 ** np.arange(512)
        er = er - null_basis.T @ (null_basis @ er)
        e = normalize_expectations(er, np.ones(512))
        verdict = kernel_orthogonality(sym, e, 512)
        assert verdict.classical_arbitrage == ABSENT

    def test_order_cap(self):
        sym = build_symbol(ar1_generating(0.5))
        with pytest.raises(InputError):
            kernel_orthogonality(sym, geometric_expectations(0.25), trunc=2048)


class TestNearArbitrage:
    def test_ar1_frozen_quadratic_form(self):
        # q = (1 - ab)^2 / ((1 - a^2)(1 - b^2)) = 1.0888... at a=1/2, b=1/4
        fac = factorize(build_symbol(ar1_generating(0.5)))
        crossed, q = near_arbitrage(fac, geometric_expectations(0.25), 2.0)
        assert_allclose(q, 1.0888888888888888, atol=1e-9)
        assert not crossed

    def test_threshold_crossing(self):
        fac = factorize(build_symbol(ar1_generating(0.5)))
        crossed, q = near_arbitrage(fac, geometric_expectations(0.25), 1.0)
        assert crossed

    def test_zero_expectations(self):
        fac = factorize(build_symbol(ar1_generating(0.5)))
        e = normalize_expectations(np.zeros(8), np.ones(8))
        crossed, q = near_arbitrage(fac, e, 0.5)
        assert q == 0.0
        assert not crossed

    def test_quadratic_scaling(self):
        fac = factorize(build_symbol(ar1_generating(0.5)))
        _, q1 = near_arbitrage(fac, geometric_expectations(0.25), 2.0)
        _, q2 = near_arbitrage(fac, geometric_expectations(0.25, e0=2.0), 2.0)
        assert q2 == 4.0 * q1

    def test_nonnegative_on_random_expectations(self):
        rng = np.random.default_rng(5)
        fac = factorize(build_symbol(ar1_generating(0.5)))
        for _ in range(20):
            e = normalize_expectations(
                rng.standard_normal(64), rng.uniform(0.5, 2.0, 64)
            )
            _, q = near_arbitrage(fac, e, 1.0)
            assert q >= -1e-12

    def test_rejects_nonpositive_threshold(self):
        fac = identity_factorization(8)
        with pytest.raises(InputError):
            near_arbitrage(fac, geometric_expectations(0.25, n=9), 0.0)


class TestReport:
    def test_full_report_ar1(self):
        sym = build_symbol(ar1_generating(0.5))
        fac = factorize(sym)
        report = build_report(sym, geometric_expectations(0.25), fac, threshold=2.0)
        assert report.invertible
        assert report.classical_arbitrage == ABSENT
        assert report.kernel_dimension_estimate == 0
        assert_allclose(report.quadratic_form, 1.0888888888888888, atol=1e-9)
        assert not report.near_arbitrage
        assert report.near_arbitrage == (report.quadratic_form > report.threshold)

    def test_without_expectations(self):
        sym = build_symbol(ar1_generating(0.5))
        report = build_report(sym)
        assert report.classical_arbitrage == NOT_APPLICABLE
        assert report.quadratic_form is None
        assert not report.near_arbitrage

    def test_degenerate_symbol_report(self):
        sym = degenerate_symbol()
        report = build_report(sym, geometric_expectations(0.5, n=512), None, 2.0)
        assert not report.invertible
        assert report.quadratic_form is None
        assert report.kernel_dimension_estimate >= 1
