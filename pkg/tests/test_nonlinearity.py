import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrbath import spectra
from kerrbath.errors import DomainError, GridTooCoarse
from kerrbath.greens import solve_greens
from kerrbath.nonlinearity import eta_closed, eta_series, unitary_integrand
from kerrbath.spectra import BathSpectrum


class TestClosedCurve:
    @pytest.mark.parametrize("t", [1e-6, 1e-3, 0.1, 0.3, 0.4999, 0.5, 2.0, 20.0])
    def test_against_mpmath(self, t):
        with mpmath.workdps(40):
            ref = float(mpmath.mpf(t) - mpmath.sin(mpmath.mpf(t)))
        assert eta_closed(1.0, t) == pytest.approx(ref, rel=1e-14)

    def test_examples(self):
        assert eta_closed(1.0, 0.0) == 0.0
        assert eta_closed(2.0, math.pi) == pytest.approx(4 * math.pi)
        assert eta_closed(1.0, 20.0) == pytest.approx(20 - math.sin(20))

    def test_array(self):
        t = np.array([0.0, 0.2, 1.0, 5.0])
        np.testing.assert_allclose(eta_closed(1.0, t), [eta_closed(1.0, x) for x in t],
                                   rtol=1e-15)

    def test_negative_time(self):
        with pytest.raises(DomainError):
            eta_closed(1.0, -0.1)

    @given(st.floats(0.0, 50.0))
    def test_nonnegative_and_monotone(self, t):
        assert eta_closed(1.0, t) >= 0
        assert eta_closed(1.0, t + 0.01) >= eta_closed(1.0, t)


class TestContinuumSeries:
    def test_closed_system(self):
        table = solve_greens(BathSpectrum(1, 0.0, 1.0), 20.0, 0.02, tol=1e-10)
        series = eta_series(table, g0=1.3)
        np.testing.assert_allclose(series.eta, series.eta_closed,
                                   rtol=1e-6, atol=1e-9)
        assert np.all(series.eta_bath == 0)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("cutoff", [1.0, 100.0])
    def test_basic_properties(self, k, cutoff, table_cache):
        series = eta_series(table_cache(k, 0.3, cutoff))
        assert series.eta[0] == 0.0
        assert np.all(series.eta >= 0)
        np.testing.assert_allclose(series.eta,
                                   np.abs(series.eta_unitary + series.eta_bath),
                                   rtol=1e-14, atol=0)

    def test_zero_kernel_is_unitary_only(self, table_cache):
        table = table_cache(1.0, 0.3, 1.0)
        full = eta_series(table)
        bare = eta_series(table, kernel=lambda t: 0.0 * t)
        np.testing.assert_array_equal(bare.eta_unitary, full.eta_unitary)
        assert np.all(bare.eta_bath == 0)
        assert bare.params["custom_kernel"] and not full.params["custom_kernel"]

    def test_unitary_integrand_antisymmetric(self, table_cache):
        table = table_cache(0.5, 0.3, 1.0)
        m = unitary_integrand(table, slice(0, 200), slice(0, 200))
        assert np.all(np.diag(m) == 0)
        np.testing.assert_array_equal(m, -m.T)

    @given(st.floats(0.01, 10.0))
    @settings(max_examples=20)
    def test_g0_scaling(self, g0):
        table = solve_greens(BathSpectrum(2.0, 0.3, 1.0), 3.0, 0.05, tol=1e-8)
        one = eta_series(table, g0=1.0, probe=False)
        other = eta_series(table, g0=g0, probe=False)
        np.testing.assert_array_equal(other.eta, (g0 * g0) * one.eta)
        np.testing.assert_array_equal(other.eta_bath, (g0 * g0) * one.eta_bath)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_grid_convergence_within_estimate(self, k, table_cache):
        coarse = eta_series(table_cache(k, 0.3, 1.0, t_max=10.0, h=0.04))
        fine = eta_series(table_cache(k, 0.3, 1.0, t_max=10.0, h=0.02))
        gap = np.max(np.abs(coarse.eta - fine.eta[::2]))
        assert gap <= 4 * coarse.grid_meta["estimated_abs_error"] + 1e-9

    def test_grid_too_coarse(self):
        table = solve_greens(BathSpectrum(1, 0.3, 100.0), 2.0, 0.05, tol=1e-6)
        with pytest.raises(GridTooCoarse):
            eta_series(table, tol=1e-9)

    def test_printed_normalisation(self, table_cache):
        table = table_cache(0.5, 0.3, 100.0)
        exact = eta_series(table, probe=False)
        printed = eta_series(table, normalization="printed", probe=False)
        np.testing.assert_array_equal(printed.eta_unitary, exact.eta_unitary)
        np.testing.assert_allclose(printed.eta_bath, exact.eta_bath / 100.0,
                                   rtol=1e-10, atol=1e-15)

    def test_convention_scales_bath_term(self, table_cache):
        table = table_cache(1.0, 0.3, 1.0)
        two = eta_series(table, probe=False)
        unit = eta_series(table, convention="unit", probe=False)
        np.testing.assert_allclose(unit.eta_bath, two.eta_bath * math.pi / 2, rtol=1e-12)

    def test_subset_of_times(self, table_cache):
        table = table_cache(1.0, 0.3, 1.0)
        full = eta_series(table, probe=False)
        part = eta_series(table, times=[1.0, 5.0, 20.0], probe=False)
        np.testing.assert_allclose(part.times, [1.0, 5.0, 20.0])
        np.testing.assert_array_equal(part.eta, full.eta[[50, 250, 1000]])

    def test_spec_mismatch(self, table_cache):
        with pytest.raises(DomainError):
            eta_series(table_cache(1.0, 0.3, 1.0), BathSpectrum(2.0, 0.3, 1.0))

    def test_off_grid_time(self, table_cache):
        with pytest.raises(DomainError):
            eta_series(table_cache(1.0, 0.3, 1.0), times=[1.001])

    def test_metadata(self, table_cache):
        series = eta_series(table_cache(1.0, 0.3, 1.0))
        meta = series.grid_meta
        assert meta["h"] == 0.02 and meta["n_steps"] == 1000
        assert 0 <= meta["estimated_rel_error"] < 0.02
        assert meta["final_change_rel"] < 0.02
        assert series.params["spec"]["k"] == 1.0
        rows = list(series.rows())
        assert len(rows) == 1001 and len(rows[0]) == 5

    @given(st.sampled_from([0.5, 1.0, 2.0]), st.floats(0.0, 0.6), st.floats(0.5, 10.0),
           st.floats(0.1, 3.0))
    @settings(max_examples=10)
    def test_invariants(self, k, gamma, cutoff, g0):
        table = solve_greens(BathSpectrum(k, gamma, cutoff), 4.0, 0.04, tol=1e-7)
        series = eta_series(table, g0=g0, probe=False)
        assert series.eta[0] == 0.0
        assert np.all(series.eta >= 0)
        assert np.all(np.isfinite(series.eta))
        # small-time behaviour is set by the free motion: eta ~ g0^2 t^3 / 6
        t1 = series.times[1]
        assert series.eta[1] == pytest.approx(g0 * g0 * t1 ** 3 / 6, rel=0.05)


def test_kernel_function_scaling():
    spec = BathSpectrum(1.0, 0.3, 10.0)
    t = np.linspace(-1, 1, 9)
    exact = spectra.kernel_C_function(spec)(t)
    printed = spectra.kernel_C_function(spec, normalization="printed")(t)
    np.testing.assert_allclose(printed, exact / 10.0, rtol=1e-15)
