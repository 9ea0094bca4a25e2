"""Dispersion symbol: series evaluation, integral-representation derivatives,
critical points.  High-precision references come from the polylogarithm:
w = 2(zeta(1+a) - Re Li_{1+a}(e^{i xi})), w' = 2 Im Li_a, w'' = 2 Re Li_{a-1}."""

import math

import numpy as np
import pytest

from fraclat.symbol import (
    CriticalPoints,
    SymbolConfig,
    critical_points,
    find_xi0,
    find_xi1,
    normalization_constant,
    normalization_constant_closed_form,
    phi_eval,
    w_eval,
    w_on_dft_grid,
    w_prime,
    w_second,
)

CFG_RAW = SymbolConfig(alpha=1.5, normalize=False)
CFG = SymbolConfig(alpha=1.5)


class TestConfig:
    def test_alpha_range(self):
        with pytest.raises(ValueError):
            SymbolConfig(alpha=1.0)
        with pytest.raises(ValueError):
            SymbolConfig(alpha=2.0)

    def test_other_bounds(self):
        with pytest.raises(ValueError):
            SymbolConfig(alpha=1.5, series_terms=10)
        with pytest.raises(ValueError):
            SymbolConfig(alpha=1.5, quad_nodes=8)

    def test_tail_bound_formula(self):
        cfg = SymbolConfig(alpha=1.5, series_terms=100_000)
        assert cfg.tail_bound() == pytest.approx(4.0 / (1.5 * 100_000**1.5))


class TestWEval:
    def test_zero(self):
        assert w_eval(CFG_RAW, 0.0) == 0.0

    def test_even(self):
        assert w_eval(CFG_RAW, -0.7) == pytest.approx(w_eval(CFG_RAW, 0.7), rel=1e-14)

    def test_periodic_extension(self):
        assert w_eval(CFG_RAW, 0.9 + 2.0 * math.pi) == pytest.approx(
            w_eval(CFG_RAW, 0.9), rel=1e-12
        )

    def test_closed_form_at_pi(self):
        # only odd n survive: w(pi) = 4 (1 - 2^{-1-a}) zeta(1+a); zeta from mpmath
        import mpmath as mp

        ref = float(4 * (1 - mp.mpf(2) ** mp.mpf("-2.5")) * mp.zeta(mp.mpf("2.5")))
        assert w_eval(CFG_RAW, math.pi) == pytest.approx(ref, rel=1e-9)

    def test_frozen_value(self):
        # oracle: 2*(zeta(2.5) - Re Li_{2.5}(e^{i})) at 40 digits
        assert w_eval(CFG_RAW, 1.0) == pytest.approx(1.8839527613413515, rel=1e-10)

    def test_dft_grid_path_matches(self):
        for m in (16, 48, 64):
            xi = 2.0 * math.pi * (np.arange(m) - m // 2) / m
            direct = np.asarray(w_eval(CFG_RAW, xi))
            folded = w_on_dft_grid(CFG_RAW, m)
            assert np.abs(direct - folded).max() < 1e-12

    def test_normalized_small_xi(self):
        # normalized symbol approaches |xi|^alpha
        for xi in (1e-3, 3e-3):
            assert w_eval(CFG, xi) == pytest.approx(xi**1.5, rel=5e-2)


class TestWPrime:
    def test_zero_at_pi(self):
        assert abs(w_prime(CFG_RAW, math.pi)) < 1e-12

    def test_frozen_value(self):
        # oracle: 2 Im Li_{1.5}(e^{i}) at 40 digits
        assert w_prime(CFG_RAW, 1.0) == pytest.approx(2.1011176942556032, rel=1e-11)

    def test_small_xi_constant(self):
        # w'(xi)/xi^{alpha-1} -> pi/(Gamma(a) sin(a pi/2)); the ratio carries
        # an O(xi^{2-alpha}) correction, removed by Richardson extrapolation
        c_lim = math.pi / (math.gamma(1.5) * math.sin(0.75 * math.pi))
        r1 = w_prime(CFG_RAW, 0.01) / 0.01**0.5
        r2 = w_prime(CFG_RAW, 0.0025) / 0.0025**0.5
        extrap = (r2 - 0.5 * r1) / (1.0 - 0.5)  # 2^{-(2-alpha)} = 1/2
        assert extrap == pytest.approx(c_lim, rel=2e-3)

    def test_positive_inside(self):
        xs = np.linspace(0.01, math.pi - 0.01, 500)
        assert np.all(np.asarray(w_prime(CFG_RAW, xs)) > 0.0)

    def test_matches_abel_summed_sine_series(self):
        # the differentiated series 2 sum sin(n xi)/n^alpha converges only
        # conditionally; its Abel sum 2 sum r^n sin(n xi)/n^alpha, r -> 1-,
        # extrapolated linearly in (1-r), is an independent oracle
        xi = 1.3
        n = np.arange(1, 400_000, dtype=float)
        base = np.sin(n * xi) / n**1.5

        def abel(r):
            return 2.0 * float(np.sum(r**n * base))

        r1, r2 = 1.0 - 2e-3, 1.0 - 1e-3
        a1, a2 = abel(r1), abel(r2)
        extrap = a2 + (a2 - a1)  # removes the O(1-r) term
        assert w_prime(CFG_RAW, xi) == pytest.approx(extrap, rel=1e-5)


class TestWSecond:
    def test_large_near_zero(self):
        # O(xi^{alpha-2}) blow-up: large, positive, with the right growth trend
        assert w_second(CFG_RAW, 1e-3) > 50.0
        ratio = w_second(CFG_RAW, 1e-4) / w_second(CFG_RAW, 1e-3)
        assert 2.5 < ratio < 4.0  # ~ 10^{2-alpha} = sqrt(10)

    def test_negative_at_half_pi(self):
        assert w_second(CFG_RAW, math.pi / 2.0) < 0.0

    def test_frozen_value(self):
        # oracle: 2 Re Li_{0.5}(e^{2i}) at 40 digits
        assert w_second(CFG_RAW, 2.0) == pytest.approx(-1.0398724225846287, rel=1e-10)

    def test_domain_error_at_zero(self):
        with pytest.raises(ValueError):
            w_second(CFG_RAW, 0.0)


class TestDerivativeConsistency:
    def test_fd_w_vs_wprime(self):
        d = 1e-5
        for xi in (0.8, 1.5, 2.4):
            fd = (w_eval(CFG_RAW, xi + d) - w_eval(CFG_RAW, xi - d)) / (2 * d)
            assert abs(fd - w_prime(CFG_RAW, xi)) < 1e-6

    def test_fd_wprime_vs_wsecond(self):
        d = 1e-5
        for xi in (0.8, 1.5, 2.4):
            fd = (w_prime(CFG_RAW, xi + d) - w_prime(CFG_RAW, xi - d)) / (2 * d)
            assert abs(fd - w_second(CFG_RAW, xi)) < 1e-6


class TestCriticalPoints:
    def test_xi0_frozen(self):
        # oracle: mpmath root of 2 Re Li_{0.5}(e^{i xi}) = 0
        assert find_xi0(CFG_RAW) == pytest.approx(0.743772937966011, abs=1e-10)

    @pytest.mark.parametrize("alpha", [1.5, 1.9])
    def test_xi0_interval(self, alpha):
        xi0 = find_xi0(SymbolConfig(alpha=alpha))
        assert 0.0 < xi0 < math.pi / 2.0

    def test_xi1_frozen(self):
        # oracle: mpmath root of (1/b-1) w'^2 + w w'' on (xi0, pi)
        assert find_xi1(CFG_RAW, 0.85) == pytest.approx(1.01410502027488, abs=1e-9)

    def test_xi1_exceeds_xi0(self):
        cps = critical_points(CFG_RAW, 0.85)
        assert cps.xi1 > cps.xi0
        assert cps.xi2 == math.pi

    def test_beta_one_collapse(self):
        assert find_xi1(CFG_RAW, 1.0) == find_xi0(CFG_RAW)

    def test_normalization_invariance(self):
        # critical points do not move under the c-normalization
        assert find_xi0(CFG) == pytest.approx(find_xi0(CFG_RAW), abs=1e-11)

    def test_invalid_critical_points_rejected(self):
        with pytest.raises(ValueError):
            CriticalPoints(xi0=2.0, xi1=2.5)


class TestPhi:
    def test_zero(self):
        assert phi_eval(CFG_RAW, 0.5, 0.0, beta=0.85) == 0.0

    def test_beta_one_h_one_collapse(self):
        # exponent collapse: phi_1 = w at beta = 1, h = 1
        assert phi_eval(CFG_RAW, 1.0, 1.3, beta=1.0) == pytest.approx(
            w_eval(CFG_RAW, 1.3), rel=1e-14
        )

    def test_frozen_composition(self):
        # oracle: 0.1^{-sigma} (w(1)/c)^{1/0.85} at 40 digits with the closed-form
        # c; the artifact normalizes by the Richardson-fitted c (~2e-6 apart)
        assert phi_eval(CFG, 0.1, 1.0, beta=0.85) == pytest.approx(
            29.6355737085628, rel=1e-5
        )

    def test_beta_required(self):
        with pytest.raises(ValueError):
            phi_eval(CFG_RAW, 0.1, 1.0)


class TestSymbolInvariants:
    def test_sandwich(self):
        xs = np.linspace(0.01, math.pi, 400)
        ratio = np.asarray(w_eval(CFG, xs)) / xs**1.5
        assert ratio.min() > 0.0 and np.isfinite(ratio.max())

    def test_strict_increase_of_w(self):
        xs = np.linspace(0.01, math.pi - 0.01, 1500)
        assert np.all(np.diff(np.asarray(w_eval(CFG, xs))) > 0.0)

    def test_derivative_bounds(self):
        xs = np.linspace(0.02, math.pi - 0.02, 800)
        wp = np.asarray(w_prime(CFG, xs))
        assert np.all(wp <= 4.0 * xs**0.5)
        assert np.all(wp >= 0.05 * xs**0.5 * (math.pi - xs))

    def test_wsecond_strictly_decreasing(self):
        xs = np.linspace(0.05, math.pi - 1e-6, 900)
        assert np.all(np.diff(np.asarray(w_second(CFG, xs))) < 0.0)

    def test_small_xi_residual_slope(self):
        xs = np.geomspace(1e-3, 0.1, 25)
        resid = np.abs(np.asarray(w_eval(CFG, xs)) - xs**1.5)
        slope = np.polyfit(np.log(xs), np.log(resid), 1)[0]
        assert abs(slope - 2.0) <= 0.05

    def test_normalization_cross_check(self):
        # Richardson fit against pi/(Gamma(1+a) sin(a pi/2))
        for alpha in (1.2, 1.5, 1.9):
            cfg = SymbolConfig(alpha=alpha)
            fit = normalization_constant(cfg)
            closed = normalization_constant_closed_form(alpha)
            assert fit == pytest.approx(closed, rel=1e-4)
