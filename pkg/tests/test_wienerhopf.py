"""Symbol construction, factorization, and the two inversion routes."""

import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bondopt.errors import (
    InputError,
    NonPositiveSymbol,
    NotNormalized,
    PoleOnCircle,
    PoleOnWrongSide,
    RootOnCircle,
)
from bondopt.laurent import LaurentSeries, Polynomial, RationalFunction
from bondopt.wienerhopf import (
    apply_inverse,
    build_symbol,
    factorize,
    identity_factorization,
    symbol_from_rational,
    toeplitz_matrix,
    toeplitz_solve_oracle,
)


def ar1_generating(alpha):
    """C(z) = 1 / (1 - alpha z) as a rational function, C(0) = 1."""
    return RationalFunction(-1.0 / alpha, [], [1.0 / alpha])


def symmetric_generating():
    """C(z) = 1 - (10/29) z; symbol zeros work out to exactly 0.4 and 2.5."""
    return RationalFunction.from_polynomials(
        Polynomial([1.0, -10.0 / 29.0]), Polynomial([1.0])
    )


def geometric_series(ratio, trunc=256):
    return LaurentSeries(ratio ** np.arange(trunc + 1), 0)


class TestBuildSymbol:
    def test_ar1_laurent_coefficients(self):
        sym = build_symbol(ar1_generating(0.5), trunc=64)
        for k in range(-64, 65):
            assert_allclose(sym.laurent.coefficient(k), 0.5 ** abs(k), atol=1e-15)

    def test_coefficient_symmetry_is_exact(self):
        sym = build_symbol(ar1_generating(0.73), trunc=128)
        c = sym.laurent.coefficients
        assert np.array_equal(c, c[::-1])

    def test_ar1_circle_interval(self):
        # A(e^{i t}) = (1 - a^2) / |1 - a e^{i t}|^2 ranges over
        # [(1-a)/(1+a), (1+a)/(1-a)]
        sym = build_symbol(ar1_generating(0.5))
        assert_allclose(sym.circle_min, 1.0 / 3.0, atol=1e-9)
        assert_allclose(sym.circle_max, 3.0, atol=1e-9)
        sym = build_symbol(ar1_generating(0.9))
        assert_allclose(sym.circle_min, 1.0 / 19.0, atol=1e-9)
        assert_allclose(sym.circle_max, 19.0, atol=1e-9)

    def test_ar1_rational_form(self):
        sym = build_symbol(ar1_generating(0.5))
        assert_allclose(sym.rational.scale, -1.5, atol=1e-12)
        assert_allclose(sorted(np.abs(sym.rational.numerator_roots)), [0.0], atol=1e-12)
        assert_allclose(
            sorted(np.real(sym.rational.denominator_roots)), [0.5, 2.0], atol=1e-12
        )

    def test_symmetric_symbol_roots(self):
        sym = build_symbol(symmetric_generating())
        assert_allclose(
            sorted(np.real(sym.rational.numerator_roots)), [0.4, 2.5], atol=1e-9
        )
        assert_allclose(np.abs(sym.rational.denominator_roots), [0.0], atol=1e-12)
        assert_allclose(sym.circle_min, 0.9 / 2.9, atol=1e-9)
        assert_allclose(sym.circle_max, 4.9 / 2.9, atol=1e-9)

    def test_identity_symbol(self):
        sym = build_symbol(RationalFunction.constant(1.0), trunc=16)
        expected = np.zeros(33)
        expected[16] = 1.0
        assert_allclose(sym.laurent.coefficients, expected, atol=1e-15)
        assert_allclose([sym.circle_min, sym.circle_max], [1.0, 1.0], atol=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalized):
            build_symbol(RationalFunction(-4.0, [], [2.0]))

    def test_rejects_pole_on_circle(self):
        with pytest.raises(PoleOnCircle):
            build_symbol(RationalFunction(1.0, [], [1.0]))

    def test_rejects_pole_inside_disk(self):
        with pytest.raises(PoleOnWrongSide):
            build_symbol(RationalFunction(1.0, [], [0.5]))


class TestSymbolFromRational:
    def test_matches_generating_route(self):
        via_chat = build_symbol(ar1_generating(0.5), trunc=64)
        direct = symbol_from_rational(via_chat.rational, trunc=64)
        assert_allclose(
            direct.laurent.coefficients, via_chat.laurent.coefficients, atol=1e-12
        )
        assert_allclose(direct.circle_min, via_chat.circle_min, atol=1e-9)
        assert_allclose(direct.circle_max, via_chat.circle_max, atol=1e-9)

    def test_normalizes_center_coefficient(self):
        base = build_symbol(ar1_generating(0.5), trunc=32).rational
        doubled = RationalFunction(
            2.0 * base.scale, base.numerator_roots, base.denominator_roots
        )
        sym = symbol_from_rational(doubled, trunc=32)
        assert_allclose(sym.laurent.coefficient(0), 1.0, atol=1e-13)

    def test_rejects_asymmetric_rational(self):
        with pytest.raises(InputError):
            symbol_from_rational(RationalFunction(1.0, [2.0], [3.0]))


class TestFactorize:
    def test_ar1_plus_factor(self):
        # exp(-A_plus) = (1 - a z) / (1 - a^2): coefficients 4/3, -2/3 at a = 1/2
        fac = factorize(build_symbol(ar1_generating(0.5)))
        assert_allclose(fac.plus_expansion.coefficient(0), 4.0 / 3.0, atol=1e-12)
        assert_allclose(fac.plus_expansion.coefficient(1), -2.0 / 3.0, atol=1e-12)
        assert_allclose(fac.plus_expansion.coefficient(2), 0.0, atol=1e-12)

    def test_ar1_minus_factor(self):
        # exp(-A_minus) = 1 - a / z
        fac = factorize(build_symbol(ar1_generating(0.5)))
        assert_allclose(fac.minus_expansion.coefficient(0), 1.0, atol=1e-12)
        assert_allclose(fac.minus_expansion.coefficient(-1), -0.5, atol=1e-12)
        assert_allclose(fac.minus_expansion.coefficient(-2), 0.0, atol=1e-12)

    def test_symmetric_symbol_factors(self):
        # plus factor (1/a0)/(z - 2.5) expands to 1.16 * 0.4^k,
        # minus factor z/(z - 0.4) to 0.4^k at z^{-k}
        fac = factorize(build_symbol(symmetric_generating()))
        for k in range(6):
            assert_allclose(
                fac.plus_expansion.coefficient(k), 1.16 * 0.4**k, atol=1e-12
            )
            assert_allclose(fac.minus_expansion.coefficient(-k), 0.4**k, atol=1e-12)

    def test_product_identity_on_circle(self):
        for chat in (ar1_generating(0.5), ar1_generating(0.9), symmetric_generating()):
            fac = factorize(build_symbol(chat))
            z = np.exp(2j * np.pi * np.arange(64) / 64)
            product = (
                fac.exp_minus_plus(z) * fac.exp_minus_minus(z) * fac.symbol.rational(z)
            )
            assert np.max(np.abs(product - 1.0)) <= 1e-10

    def test_identity_factorization(self):
        fac = identity_factorization(trunc=16)
        assert_allclose(fac.plus_expansion.coefficient(0), 1.0, atol=1e-15)
        assert_allclose(fac.minus_expansion.coefficient(0), 1.0, atol=1e-15)
        assert np.max(np.abs(fac.plus_expansion.coefficients[1:])) == 0.0

    def test_root_on_circle_rejected(self):
        # C(z) = 1 + z/2 puts a double symbol zero exactly at z = -1
        chat = RationalFunction.from_polynomials(
            Polynomial([1.0, 0.5]), Polynomial([1.0])
        )
        with pytest.raises(RootOnCircle):
            factorize(build_symbol(chat))

    def test_nonpositive_guard(self):
        sym = build_symbol(ar1_generating(0.5))
        doctored = dataclasses.replace(sym, circle_min=-1e-3)
        with pytest.raises(NonPositiveSymbol):
            factorize(doctored)


class TestApplyInverse:
    def test_ar1_frozen_solution(self):
        # e_k = (1/4)^k against the a = 1/2 symbol solves to
        # (7/6) (1 - z/2) / (1 - z/4); first coefficients 7/6, -7/24, -7/96
        fac = factorize(build_symbol(ar1_generating(0.5)))
        y = apply_inverse(fac, geometric_series(0.25))
        expected = [7.0 / 6.0, -7.0 / 24.0, -7.0 / 96.0, -7.0 / 384.0]
        assert_allclose([y.coefficient(k) for k in range(4)], expected, atol=1e-12)

    def test_constant_forcing(self):
        fac = factorize(build_symbol(ar1_generating(0.5)))
        e = LaurentSeries([1.0], 0)
        y = apply_inverse(fac, e)
        assert_allclose(y.coefficient(0), 4.0 / 3.0, atol=1e-12)
        assert_allclose(y.coefficient(1), -2.0 / 3.0, atol=1e-12)
        assert_allclose(y.coefficient(2), 0.0, atol=1e-14)

    def test_identity_symbol_returns_input(self):
        fac = identity_factorization(trunc=32)
        e = LaurentSeries(np.linspace(1.0, 0.1, 10), 0)
        y = apply_inverse(fac, e)
        assert_allclose(y.slice(0, 9).coefficients, e.coefficients, atol=1e-14)

    def test_rejects_two_sided_input(self):
        fac = identity_factorization(trunc=8)
        with pytest.raises(InputError):
            apply_inverse(fac, LaurentSeries([1.0, 1.0], -1))

    def test_truncation_control(self):
        fac = factorize(build_symbol(ar1_generating(0.5), trunc=32))
        y = apply_inverse(fac, geometric_series(0.25, trunc=32), trunc=10)
        assert y.max_index == 10
        with pytest.raises(InputError):
            apply_inverse(fac, geometric_series(0.25, trunc=32), trunc=64)


class TestDenseOracle:
    def test_matrix_is_symmetric_toeplitz(self):
        sym = build_symbol(ar1_generating(0.5))
        m = toeplitz_matrix(sym, 8)
        assert_allclose(m, m.T, atol=0.0)
        assert_allclose(np.diag(m), np.ones(8), atol=1e-15)
        assert_allclose(m[3, 1], 0.25, atol=1e-15)

    def test_eigenvalues_within_circle_range(self):
        sym = build_symbol(ar1_generating(0.5))
        eig = np.linalg.eigvalsh(toeplitz_matrix(sym, 64))
        assert eig.min() >= sym.circle_min - 1e-9
        assert eig.max() <= sym.circle_max + 1e-9

    def test_oracle_solves_the_dense_system(self):
        rng = np.random.default_rng(7)
        sym = build_symbol(ar1_generating(0.5))
        e = LaurentSeries(rng.standard_normal(40), 0)
        y = toeplitz_solve_oracle(sym, e, 40)
        m = toeplitz_matrix(sym, 40)
        assert_allclose(m @ y.coefficients, e.coefficients, atol=1e-12)

    def test_order_cap_enforced(self):
        sym = build_symbol(ar1_generating(0.5), trunc=8)
        with pytest.raises(InputError):
            toeplitz_matrix(sym, 4096)
        with pytest.raises(InputError):
            toeplitz_matrix(sym, 10)  # exceeds the stored Laurent lags


class TestRoutesAgree:
    """apply_inverse and the dense solve are independent implementations."""

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9, -0.5])
    def test_ar1_routes_agree(self, alpha):
        rng = np.random.default_rng(11)
        fac = factorize(build_symbol(ar1_generating(alpha)))
        e = LaurentSeries(rng.standard_normal(200), 0)
        fast = apply_inverse(fac, e, trunc=199)
        dense = toeplitz_solve_oracle(fac.symbol, e, 200)
        assert_allclose(
            fast.slice(0, 49).coefficients,
            dense.slice(0, 49).coefficients,
            atol=1e-6,
        )

    def test_symmetric_symbol_routes_agree(self):
        rng = np.random.default_rng(13)
        fac = factorize(build_symbol(symmetric_generating()))
        e = LaurentSeries(rng.standard_normal(200), 0)
        fast = apply_inverse(fac, e, trunc=199)
        dense = toeplitz_solve_oracle(fac.symbol, e, 200)
        assert_allclose(
            fast.slice(0, 49).coefficients,
            dense.slice(0, 49).coefficients,
            atol=1e-8,
        )
