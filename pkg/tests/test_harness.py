"""Experiment plumbing: order fitting, reports, quick experiment smoke runs."""

import math

import numpy as np
import pytest

from fraclat.harness import (
    fit_order,
    gaussian_profile,
    nyquist_packet,
    run_continuum_study,
    run_mass_uniformity,
    run_ml_check,
    run_smoothing_experiment,
    run_symbol_checks,
    spectral_mass_near,
)
from fraclat.lattice import LatticeGrid
from fraclat.solver import ModelParams


def gauss(x):
    return np.exp(-((np.asarray(x) / 2.0) ** 2)).astype(complex)


class TestFitOrder:
    def test_exact_square(self):
        hs = [0.4, 0.2, 0.1, 0.05]
        assert fit_order([(h, h**2) for h in hs]) == pytest.approx(2.0, abs=1e-12)

    def test_scaled_half_power(self):
        hs = [0.4, 0.2, 0.1]
        assert fit_order([(h, 3.0 * h**0.5) for h in hs]) == pytest.approx(0.5, abs=1e-12)

    def test_noisy_half_power(self):
        rng = np.random.default_rng(11)
        hs = np.geomspace(0.4, 0.0125, 8)
        errs = hs**0.5 * (1.0 + rng.uniform(-0.02, 0.02, hs.size))
        assert fit_order(list(zip(hs, errs))) == pytest.approx(0.5, abs=0.05)

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            fit_order([(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)])
        with pytest.raises(ValueError):
            fit_order([(0.1, 1.0), (0.2, 2.0)])
        with pytest.raises(ValueError):
            fit_order([(0.1, 1.0), (0.2, 0.0), (0.4, 2.0)])


class TestInitialData:
    def test_gaussian_profile_modulation(self):
        f = gaussian_profile(amplitude=2.0, width=1.0, center=0.5, freq=3.0)
        x = np.array([0.5])
        assert f(x)[0] == pytest.approx(2.0 * np.exp(1.5j), rel=1e-12)

    def test_nyquist_packet_mass_concentration(self):
        grid = LatticeGrid(h=0.1, n_points=512)
        pkt = nyquist_packet(grid, width=4.0)
        assert spectral_mass_near(pkt, math.pi, 0.2) > 0.95
        assert spectral_mass_near(pkt, 0.0, 0.2) < 0.01


class TestSymbolChecks:
    def test_single_alpha_passes(self):
        rep = run_symbol_checks([1.5], grid_points=2000)
        assert rep["pass"]
        entry = rep["results"][0]
        assert entry["w_second_sign_changes"] == 1
        assert 0.0 < entry["xi0"] < math.pi / 2.0
        assert entry["xi0"] < entry["xi1"] < math.pi


class TestMassUniformity:
    def test_beta_one_is_unitary(self):
        params = ModelParams(alpha=1.5, beta=1.0)
        rep = run_mass_uniformity(params, [0.4, 0.2], gauss, extent=12.8, T=0.5, n_times=16)
        for e in rep["entries"]:
            assert e["ratio"] == pytest.approx(1.0, abs=1e-12)
        assert rep["pass"]

    def test_zero_data_flagged(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        rep = run_mass_uniformity(
            params,
            [0.4],
            lambda x: np.zeros_like(np.asarray(x), dtype=complex),
            extent=12.8,
            T=0.5,
            n_times=4,
        )
        assert rep["entries"][0]["skipped"] == "zero initial data"
        assert not rep["pass"]


class TestSmoothing:
    def test_dichotomy_direction(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        rep = run_smoothing_experiment(params, [0.2, 0.1], extent=25.6, T=1.0, n_times=32)
        assert rep["packet_mass_ok"]
        # unfiltered grows strictly faster than filtered at the halving
        assert rep["unfiltered_growth_ratios"][0] > rep["filtered_ratios"][0]
        assert rep["dichotomy"]

    @pytest.mark.parametrize("alpha,beta", [(1.7, 0.9), (1.3, 0.95)])
    def test_dichotomy_parameter_stability(self, alpha, beta):
        # the separation persists across the admissible corner cases tested
        params = ModelParams(alpha=alpha, beta=beta)
        rep = run_smoothing_experiment(params, [0.2, 0.1], extent=25.6, T=1.0, n_times=32)
        assert rep["dichotomy"]

    def test_filtered_constant_data_flat(self):
        # zero-frequency data: multiplier 1, quotient ~ sqrt(T), flat in h
        from fraclat.harness import _phase_evolution
        from fraclat.lattice import LatticeField, filter_pi, norm_lp, norm_smoothing

        params = ModelParams(alpha=1.5, beta=0.85)
        qs = []
        for h in (0.4, 0.2):
            coarse = LatticeGrid(h=2 * h, n_points=int(round(12.8 / h)) // 2)
            ones = LatticeField(grid=coarse, values=np.ones(coarse.n_points, dtype=complex))
            u0 = filter_pi(ones)
            traj = _phase_evolution(u0, params, np.linspace(0.0, 1.0, 17))
            qs.append(norm_smoothing(traj, 0.3) / norm_lp(u0, 2))
        assert qs[0] == pytest.approx(qs[1], rel=1e-6)


class TestContinuumStudy:
    def test_zero_data_flagged(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        rep = run_continuum_study(
            params,
            [0.4, 0.2, 0.1],
            0.025,
            lambda x: np.zeros_like(np.asarray(x), dtype=complex),
            extent=12.8,
            T=0.2,
            m_steps=8,
        )
        assert math.isnan(rep["fitted_order"])
        assert not rep["pass"]

    def test_linear_rate_small(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        rep = run_continuum_study(
            params,
            [0.4, 0.2, 0.1],
            0.025,
            gauss,
            extent=25.6,
            T=1.0,
            m_steps=8,
            linear_only=True,
        )
        assert rep["monotone"]
        assert abs(rep["fitted_order"] - 0.5) <= 0.3

    def test_h_ref_precondition(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        with pytest.raises(ValueError):
            run_continuum_study(params, [0.4, 0.2], 0.2, gauss, extent=12.8)


class TestMlCheckReport:
    def test_small_sweep(self):
        rep = run_ml_check(betas=(0.8,), n_radii=9, r_max=30.0)
        assert rep["pass"]
        assert rep["results"][0]["sup_|E_beta|_on_ray"] < 10.0


class TestWorkers:
    def test_thread_fanout_matches_serial(self):
        params = ModelParams(alpha=1.5, beta=0.85)
        r1 = run_mass_uniformity(params, [0.4, 0.2], gauss, extent=12.8, T=0.5,
                                 n_times=8, workers=1)
        r2 = run_mass_uniformity(params, [0.4, 0.2], gauss, extent=12.8, T=0.5,
                                 n_times=8, workers=2)
        for a, b in zip(r1["entries"], r2["entries"]):
            assert a["ratio"] == b["ratio"]
