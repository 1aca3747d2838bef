import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrbath import spectra
from kerrbath.coefficients import (
    CoefficientSet,
    coefficient_set,
    compute_bath_product,
    compute_Fa,
    compute_FXP,
    displacement,
    kernel_panels,
)
from kerrbath.discrete_oracle import discretize_bath, oracle_F, oracle_greens
from kerrbath.greens import convolve_bath_coeffs, solve_greens
from kerrbath.nonlinearity import eta_series
from kerrbath.quadrature import cumulative_integral
from kerrbath.spectra import BathSpectrum

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def closed_table():
    return solve_greens(BathSpectrum(1, 0.0, 1.0), 4 * math.pi, 0.01, tol=1e-10)


class TestClosedSystem:
    def test_linear_coefficients(self, closed_table):
        t = closed_table.times
        f_x, f_p = compute_FXP(closed_table, 0.7)
        np.testing.assert_allclose(f_x, -SQRT2 * 0.7 * np.sin(t), atol=1e-6)
        np.testing.assert_allclose(f_p, -SQRT2 * 0.7 * (1 - np.cos(t)), atol=1e-6)

    def test_quadratic_coefficient(self, closed_table):
        t = closed_table.times
        f_a = compute_Fa(closed_table, g0=0.7)
        np.testing.assert_allclose(f_a, -0.49 * (t - np.sin(t) * np.cos(t)), atol=1e-6)

    def test_bath_product_vanishes(self, closed_table):
        assert np.all(compute_bath_product(closed_table) == 0)

    def test_combination_is_closed_nonlinearity(self, closed_table):
        t = closed_table.times
        f_x, f_p = compute_FXP(closed_table, 1.0)
        f_a = compute_Fa(closed_table)
        np.testing.assert_allclose(np.abs(f_a + 0.5 * f_x * f_p), t - np.sin(t), atol=1e-6)


class TestDampedCoefficients:
    def test_start_at_zero(self, table_cache):
        table = table_cache(0.5, 0.3, 1.0)
        f_x, f_p = compute_FXP(table, 1.0)
        assert f_x[0] == f_p[0] == 0.0
        assert compute_Fa(table)[0] == 0.0
        assert compute_bath_product(table)[0] == 0.0

    @given(st.floats(0.01, 5.0))
    @settings(max_examples=20)
    def test_g0_scaling(self, g0):
        table = solve_greens(BathSpectrum(1, 0.3, 1.0), 2.0, 0.05, tol=1e-8)
        f_x, f_p = compute_FXP(table, g0)
        f_x1, f_p1 = compute_FXP(table, 1.0)
        np.testing.assert_array_equal(f_x, g0 * f_x1)
        np.testing.assert_array_equal(f_p, g0 * f_p1)
        np.testing.assert_array_equal(compute_Fa(table, g0=g0), (g0 * g0) * compute_Fa(table))
        np.testing.assert_array_equal(compute_bath_product(table, g0=g0),
                                      (g0 * g0) * compute_bath_product(table))

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_identity_with_nonlinearity(self, k, table_cache):
        table = table_cache(k, 0.3, 1.0)
        series = eta_series(table, probe=False)
        f_x, f_p = compute_FXP(table, 1.0)
        total = compute_Fa(table) + 0.5 * f_x * f_p + compute_bath_product(table)
        # the two sides use different second-order quadratures of one integral
        np.testing.assert_allclose(total, -(series.eta_unitary + series.eta_bath),
                                   rtol=0, atol=1e-6 * np.max(np.abs(total)))

    def test_frequency_domain_route(self):
        # bath part of F_a = -2 g0^2 c int dW sigma int beta_bar int alpha_bar
        spec = BathSpectrum(2.0, 0.3, 1.0)
        table = solve_greens(spec, 5.0, 0.02, tol=1e-9)
        n5 = table.index_of(5.0)[0]
        h = table.h
        nodes, weights = np.polynomial.legendre.leggauss(120)
        omegas = 20.0 * (nodes + 1)
        weights = 20.0 * weights
        bath = 0.0
        for w, wt in zip(omegas, weights):
            a_bar, b_bar = convolve_bath_coeffs(table, w)
            inner = cumulative_integral(a_bar[:n5 + 1], h)
            outer = cumulative_integral(b_bar[:n5 + 1] * inner, h)[-1]
            bath += wt * spectra.spectral_density(spec, w) * outer
        bath *= 2 / math.pi
        unitary = cumulative_integral(table.beta * cumulative_integral(table.alpha, h), h)[n5]
        expected = -2.0 * (unitary + bath)
        # the time-domain bath term is second order in h
        coarse = compute_Fa(table)[n5]
        fine = compute_Fa(solve_greens(spec, 5.0, 0.01, tol=1e-9))[-1]
        assert coarse == pytest.approx(expected, rel=5e-5)
        assert fine + (fine - coarse) / 3 == pytest.approx(expected, rel=1e-7)

    def test_against_explicit_bath(self, table_cache):
        spec = BathSpectrum(1.0, 0.3, 1.0)
        bath = discretize_bath(spec, 1000, 20.0)
        disc = oracle_F(bath, oracle_greens(bath, 5.0, 0.01), 1.0, 5.0)
        cont = coefficient_set(table_cache(1.0, 0.3, 1.0), 1.0, 5.0)
        assert disc.F_a == pytest.approx(cont.F_a, rel=0.05)
        assert disc.F_X == pytest.approx(cont.F_X, rel=0.05)
        assert disc.F_P == pytest.approx(cont.F_P, rel=0.05)

    def test_printed_normalisation_divides_bath_part(self, table_cache):
        table = table_cache(1.0, 0.3, 100.0)
        unitary_only = compute_Fa(table, kernel=lambda t: 0.0 * t)
        exact = compute_Fa(table) - unitary_only
        printed = compute_Fa(table, normalization="printed") - unitary_only
        np.testing.assert_allclose(printed, exact / 100.0, rtol=1e-10, atol=1e-14)


class TestCoefficientSet:
    def test_single_time(self, table_cache):
        table = table_cache(1.0, 0.3, 1.0)
        cs = coefficient_set(table, 0.8, 3.0)
        f_x, f_p = compute_FXP(table, 0.8)
        i = table.index_of(3.0)[0]
        assert cs.t == pytest.approx(3.0)
        assert cs.F_X == pytest.approx(f_x[i], abs=1e-12)
        assert cs.F_P == pytest.approx(f_p[i], abs=1e-12)
        assert cs.F_a == pytest.approx(compute_Fa(table, g0=0.8)[i], abs=1e-8)

    def test_displacement_identity(self):
        cs = CoefficientSet(t=1.0, F_a=-0.3, F_X=0.4, F_P=-1.1, g0=1.0)
        # F_X = -sqrt(2) Im K, F_P = sqrt(2) Re K
        assert -SQRT2 * cs.K_m.imag == pytest.approx(cs.F_X)
        assert SQRT2 * cs.K_m.real == pytest.approx(cs.F_P)
        assert cs.K_j is None
        assert cs.eta() == pytest.approx(abs(-0.3 + 0.5 * 0.4 * -1.1))

    def test_mode_arrays(self):
        cs = CoefficientSet(t=1.0, F_a=0.1, F_X=0.2, F_P=0.3, g0=1.0,
                            F_jX=np.array([1.0, 2.0]), F_jP=np.array([0.5, -0.25]))
        np.testing.assert_allclose(cs.K_j, displacement([1.0, 2.0], [0.5, -0.25]))
        assert cs.eta() == pytest.approx(abs(0.1 + 0.03 + 0.5 * (0.5 - 0.5)))


def test_kernel_panels():
    assert kernel_panels(0.02, 1.0) == 1
    assert kernel_panels(0.02, 100.0) == 2
    assert kernel_panels(0.05, 1000.0) == 50
