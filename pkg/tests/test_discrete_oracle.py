import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrbath import spectra
from kerrbath.coefficients import displacement
from kerrbath.errors import DomainError
from kerrbath.discrete_oracle import (
    default_omega_max,
    discrete_memory_kernel,
    discretize_bath,
    fundamental_solution,
    oracle_coefficients,
    oracle_eta,
    oracle_F,
    oracle_greens,
    oracle_step,
    truncation_report,
)
from kerrbath.nonlinearity import eta_series
from kerrbath.spectra import BathSpectrum


class TestDiscretisation:
    def test_closed_system_has_no_coupling(self):
        bath = discretize_bath(BathSpectrum(1, 0.0, 1.0), 100, 20.0)
        assert np.all(bath.kappas == 0)

    def test_coupling_sum(self, oracle_values):
        for row in oracle_values["total_weight"]:
            bath = discretize_bath(BathSpectrum(row["k"], row["gamma"], row["cutoff"]),
                                   2000, row["omega_max"])
            expected = 2 / math.pi * row["value"]
            assert abs(np.sum(bath.kappas ** 2) - expected) < 1e-3 * expected

    def test_midpoint_nodes(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 40, 20.0)
        assert bath.d_omega == 0.5
        assert bath.omegas[0] == 0.25
        assert bath.omegas[-1] == pytest.approx(19.75)

    def test_convention(self):
        two = discretize_bath(BathSpectrum(1, 0.3 * math.pi / 2, 1.0), 50, 20.0)
        unit = discretize_bath(BathSpectrum(1, 0.3, 1.0), 50, 20.0, convention="unit")
        np.testing.assert_allclose(unit.kappas, two.kappas, rtol=1e-14)

    @pytest.mark.parametrize("n, wmax, conv", [
        (1, 20.0, "unit"), (2.5, 20.0, "unit"), (True, 20.0, "unit"),
        (10, 0.0, "unit"), (10, math.inf, "unit"), (10, 20.0, "other")])
    def test_domain(self, n, wmax, conv):
        with pytest.raises(DomainError):
            discretize_bath(BathSpectrum(1, 0.3, 1.0), n, wmax, convention=conv)

    def test_defaults(self):
        assert default_omega_max(BathSpectrum(1, 0.3, 1.0)) == 20.0
        assert default_omega_max(BathSpectrum(1, 0.3, 100.0)) == 20.0
        for h, wmax in [(0.02, 20.0), (0.05, 20.0), (0.01, 5.0)]:
            step = oracle_step(h, wmax)
            assert step <= 0.2 / wmax * (1 + 1e-12)
            assert h / step == pytest.approx(round(h / step), abs=1e-9)


class TestKernel:
    def test_truncation_report(self):
        spec = BathSpectrum(1.0, 0.3, 1.0)
        report = truncation_report(discretize_bath(spec, 2000, 20.0))
        assert report["weight_fraction"] > 1 - 1e-7
        assert report["coupling_sum"] == pytest.approx(report["coupling_sum_continuum"],
                                                       rel=1e-5)
        assert max(report["kernel_rel_deviation"]) < 1e-5

    def test_closed_report(self):
        report = truncation_report(discretize_bath(BathSpectrum(1, 0.0, 1.0), 10, 20.0))
        assert report["kernel_rel_deviation"] == [0.0, 0.0, 0.0]

    def test_midpoint_convergence(self):
        spec = BathSpectrum(1.0, 0.3, 1.0)
        exact = spectra.memory_kernel(spec, 1.0)
        devs = [abs(discrete_memory_kernel(discretize_bath(spec, n, 20.0), 1.0)[0] - exact)
                for n in (100, 200, 400)]
        assert devs[0] / devs[1] > 2 and devs[1] / devs[2] > 2


class TestResponse:
    def test_closed_system(self):
        bath = discretize_bath(BathSpectrum(1, 0.0, 1.0), 10, 20.0)
        table = oracle_greens(bath, 10.0, 0.01)
        np.testing.assert_allclose(table.g_values, np.sin(table.times), atol=1e-9)
        np.testing.assert_allclose(table.alpha, np.cos(table.times), atol=1e-9)

    @pytest.mark.parametrize("k", [1.0, 2.0])
    def test_matches_continuum(self, k, table_cache):
        bath = discretize_bath(BathSpectrum(k, 0.3, 1.0), 2000, 20.0)
        disc = oracle_greens(bath, 10.0, 0.01)
        cont = table_cache(k, 0.3, 1.0)
        gap = np.max(np.abs(disc.g_values[::2] - cont.g_values[:501]))
        assert gap < 0.01 * np.max(np.abs(cont.g_values))

    def test_subohmic_rate(self, table_cache):
        # the midpoint rule meets sigma/W ~ W^(-1/2) at the origin: error ~ N^(-1/2)
        cont = table_cache(0.5, 0.3, 1.0)
        gaps = []
        for n in (500, 2000):
            bath = discretize_bath(BathSpectrum(0.5, 0.3, 1.0), n, 20.0)
            disc = oracle_greens(bath, 10.0, 0.01)
            gaps.append(np.max(np.abs(disc.g_values[::2] - cont.g_values[:501])))
        assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.15)

    def test_truncation_insensitive(self):
        spec = BathSpectrum(1.0, 0.3, 1.0)
        values = [oracle_greens(discretize_bath(spec, 100 * int(w), w), 5.0, 0.01).g_values[-1]
                  for w in (10.0, 20.0)]
        assert abs(values[0] - values[1]) < 0.005 * abs(values[1])

    def test_step_must_resolve_modes(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 10, 20.0)
        with pytest.raises(DomainError):
            oracle_greens(bath, 1.0, 0.02)
        with pytest.raises(DomainError):
            oracle_greens(bath, 0.0, 0.01)


class TestCoefficients:
    def test_closed_system_modes_vanish(self):
        bath = discretize_bath(BathSpectrum(1, 0.0, 1.0), 20, 20.0)
        cs = oracle_F(bath, oracle_greens(bath, 3.0, 0.01), 1.0, 3.0)
        assert np.all(cs.F_jX == 0) and np.all(cs.F_jP == 0)
        assert cs.eta() == pytest.approx(3.0 - math.sin(3.0), rel=1e-8)

    def test_mode_displacements(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 200, 20.0)
        table = oracle_greens(bath, 2.0, 0.01)
        cs = oracle_F(bath, table, 0.5, 2.0)
        np.testing.assert_allclose(cs.K_j, displacement(cs.F_jX, cs.F_jP))
        co = oracle_coefficients(bath, table, 0.5)
        assert 0.5 * np.dot(cs.F_jX, cs.F_jP) == pytest.approx(co["mode_products"][200],
                                                               rel=1e-12)

    def test_off_grid(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 20, 20.0)
        with pytest.raises(DomainError):
            oracle_F(bath, oracle_greens(bath, 1.0, 0.01), 1.0, 1.005)


class TestNonlinearity:
    def test_closed_system(self):
        bath = discretize_bath(BathSpectrum(1, 0.0, 1.0), 10, 20.0)
        series = oracle_eta(bath, 1.0, np.arange(0, 41) * 0.25, h=0.25)
        np.testing.assert_allclose(series.eta, series.eta_closed, rtol=1e-6, atol=1e-9)

    @pytest.mark.parametrize("k", [1.0, 2.0])
    def test_matches_continuum(self, k, table_cache):
        bath = discretize_bath(BathSpectrum(k, 0.3, 1.0), 2000, 20.0)
        disc = oracle_eta(bath, 1.0, [10.0])
        cont = eta_series(table_cache(k, 0.3, 1.0), times=[10.0], probe=False)
        assert disc.eta[0] == pytest.approx(cont.eta[0], rel=0.05)

    def test_refinement_decreases_deviation(self, table_cache):
        cont = eta_series(table_cache(1.0, 0.3, 1.0), times=[5.0], probe=False).eta[0]
        devs = []
        for n in (100, 200, 400, 800):
            bath = discretize_bath(BathSpectrum(1.0, 0.3, 1.0), n, 20.0)
            devs.append(abs(oracle_eta(bath, 1.0, [5.0]).eta[0] - cont))
        assert all(a > b for a, b in zip(devs, devs[1:]))

    def test_zero_time(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 10, 20.0)
        assert oracle_eta(bath, 1.0, [0.0]).eta[0] == 0.0

    def test_domain(self):
        bath = discretize_bath(BathSpectrum(1, 0.3, 1.0), 10, 20.0)
        with pytest.raises(DomainError):
            oracle_eta(bath, 1.0, [-1.0])
        with pytest.raises(DomainError):
            oracle_eta(bath, 1.0, [0.013])


class TestRawEquations:
    @given(st.integers(2, 50), st.sampled_from([0.5, 1.0, 2.0]), st.floats(0.0, 1.0),
           st.sampled_from(["none", "system"]))
    @settings(max_examples=20)
    def test_symplectic(self, n, k, gamma, counter):
        bath = discretize_bath(BathSpectrum(k, gamma, 1.0), n, 20.0)
        sol = fundamental_solution(bath, [1.0], counter_term=counter)
        assert abs(sol.determinants()[0] - 1) < 1e-8
        assert sol.symplectic_defects()[0] < 1e-8

    def test_counter_term_reproduces_memory_equation(self):
        bath = discretize_bath(BathSpectrum(1.0, 0.3, 1.0), 40, 20.0)
        table = oracle_greens(bath, 3.0, 0.01)
        sol = fundamental_solution(bath, [1.0, 3.0], counter_term="system")
        # X_m response to a unit initial P_m
        raw = sol.matrices[:, 0, 1]
        np.testing.assert_allclose(raw, table.g_values[[100, 300]], atol=1e-8)

    def test_limits(self):
        with pytest.raises(DomainError):
            fundamental_solution(discretize_bath(BathSpectrum(1, 0.3, 1.0), 60, 20.0), [1.0])
        with pytest.raises(DomainError):
            fundamental_solution(discretize_bath(BathSpectrum(1, 0.3, 1.0), 6, 20.0), [1.0],
                                 counter_term="bath")
