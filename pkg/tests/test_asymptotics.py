import math

import numpy as np
import pytest

from mimoee import (
    McConfig,
    SystemParams,
    ZeroPowerError,
    goodput_regime_a,
    goodput_regime_b,
    goodput_regime_c,
    inflection_regime_a,
    inflection_regime_b,
    inflection_regime_c,
    q_function,
    regime_b_limits,
    unimodality_check,
    upa_gpr_curve_mc,
)
from mimoee.asymptotics import mu_regime_c, sigma_regime_c, _gamma_mp


class TestQFunction:
    def test_half_at_zero(self):
        assert q_function(0.0) == 0.5

    def test_symmetry(self):
        for x in (0.5, 1.0, 2.0):
            assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-15)

    def test_five_percent_quantile(self):
        assert q_function(1.6449) == pytest.approx(0.05, abs=1e-4)


class TestRegimeA:
    PARAMS = SystemParams.from_rho_db(2, 8, 10.0, 1.0, 1.0)

    def test_half_rate_where_argument_vanishes(self):
        # p solving n_t log2(1 + (n_r/n_t) rho p) = R puts the argument at 0
        params = self.PARAMS
        p = (2.0 ** (params.rate / params.n_t) - 1.0) * params.n_t / (params.n_r * params.rho)
        assert goodput_regime_a(p, params) == pytest.approx(params.rate / 2.0, rel=1e-12)

    def test_below_half_rate_at_zero_power(self):
        assert 0.0 < goodput_regime_a(0.0, self.PARAMS) < self.PARAMS.rate / 2.0

    def test_monotone_on_grid(self):
        grid = np.linspace(0.0, 1.0, 1000)
        vals = [goodput_regime_a(p, self.PARAMS) for p in grid]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= self.PARAMS.rate for v in vals)

    def test_inflection_vanishes_with_receive_antennas(self):
        params = SystemParams.from_rho_db(2, 10 ** 6, 10.0, 1.0, 1.0)
        assert 0.0 < inflection_regime_a(params) < 1e-6

    def test_inflection_positive_when_exponent_positive(self):
        params = SystemParams.from_rho_db(2, 8, 10.0, 1.0, 1.0)
        exponent = (params.rate - (params.n_t * math.log2(math.e) / params.n_r) ** 1.5
                    / params.n_t) / params.n_t
        assert exponent > 0
        assert inflection_regime_a(params) > 0

    def test_second_difference_flips_at_inflection(self):
        params = SystemParams.from_rho_db(2, 64, 10.0, 1.0, 1.0)
        p_tilde = inflection_regime_a(params)
        grid = np.linspace(p_tilde * 0.2, p_tilde * 3.0, 400)
        vals = np.array([goodput_regime_a(p, params) for p in grid])
        d2 = np.diff(vals, 2)
        flips = [grid[i + 1] for i in range(len(d2) - 1) if d2[i] > 0 > d2[i + 1]]
        assert len(flips) == 1
        assert flips[0] == pytest.approx(p_tilde, rel=0.05)

    def test_sigmoidal_single_inflection_on_log_grid(self):
        grid = np.geomspace(1e-4, 1.0, 600)
        vals = np.array([goodput_regime_a(p, self.PARAMS) for p in grid])
        d2 = np.diff(vals, 2)
        signs = np.sign(d2[np.abs(d2) > 1e-14])
        assert np.count_nonzero(np.diff(signs) != 0) == 1


class TestRegimeB:
    def test_half_rate_at_inflection(self):
        params = SystemParams.from_rho_db(10_000, 2, 10.0, 1.0, 1.0)
        p_tilde = inflection_regime_b(params)
        assert p_tilde == pytest.approx(params.sigma2 * (2 ** 0.5 - 1.0), rel=1e-14)
        assert goodput_regime_b(p_tilde, params) == pytest.approx(params.rate / 2.0,
                                                                  rel=1e-12)

    def test_step_behavior_for_many_transmit_antennas(self):
        params = SystemParams.from_rho_db(10_000, 2, 10.0, 1.0, 1.0)
        p_tilde = inflection_regime_b(params)
        assert goodput_regime_b(3.0 * p_tilde, params) == pytest.approx(params.rate,
                                                                        abs=1e-9)
        assert goodput_regime_b(p_tilde / 3.0, params) == pytest.approx(0.0, abs=1e-9)

    def test_zero_power_convention(self):
        params = SystemParams.from_rho_db(100, 2, 10.0, 1.0, 1.0)
        assert goodput_regime_b(0.0, params) == 0.0
        with pytest.raises(ZeroPowerError):
            goodput_regime_b(-0.1, params)

    def test_quoted_limits(self):
        params = SystemParams.from_rho_db(2, 2, 10.0, 1.0, 1.0)
        p_star, gamma_star = regime_b_limits(params)
        assert p_star == pytest.approx(0.0414, abs=1e-4)
        assert gamma_star == pytest.approx(12.07, abs=0.01)

    def test_unit_noise_single_receive_case(self):
        params = SystemParams(n_t=4, n_r=1, sigma2=1.0, rate=1.0, p_max=1.0)
        p_star, gamma_star = regime_b_limits(params)
        assert p_star == pytest.approx(1.0, rel=1e-14)
        assert gamma_star == pytest.approx(0.5, rel=1e-14)

    def test_limits_algebraic_identity_at_unit_rate(self):
        params = SystemParams.from_rho_db(8, 3, 7.0, 1.0, 1.0)
        p_star, gamma_star = regime_b_limits(params)
        assert gamma_star == pytest.approx((params.rate / 2.0) / p_star, rel=1e-12)

    def test_sigmoidal_single_inflection(self):
        params = SystemParams.from_rho_db(64, 2, 10.0, 1.0, 1.0)
        grid = np.geomspace(1e-3, 1.0, 600)
        vals = np.array([goodput_regime_b(p, params) for p in grid])
        d2 = np.diff(vals, 2)
        signs = np.sign(d2[np.abs(d2) > 1e-14])
        assert np.count_nonzero(np.diff(signs) != 0) == 1


class TestRegimeC:
    PARAMS = SystemParams.from_rho_db(8, 8, 10.0, 1.0, 1.0)

    def test_gamma_limit_as_power_grows(self):
        for beta in (0.5, 1.0, 2.0):
            g = _gamma_mp(beta, 1e12)
            assert g == pytest.approx(min(1.0, beta), rel=1e-5)

    def test_sigma_positive_when_gamma_below_sqrt_beta(self):
        for beta in (0.5, 1.0, 2.0):
            for p in np.geomspace(1e-3, 10.0, 30):
                g = _gamma_mp(beta, self.PARAMS.rho * p)
                assert g * g < beta
                assert sigma_regime_c(p, self.PARAMS, beta) > 0

    def test_mu_increasing_on_grid(self):
        grid = np.geomspace(1e-3, 10.0, 300)
        vals = [mu_regime_c(p, self.PARAMS, 1.0) for p in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_mu_vanishes_at_origin(self):
        assert mu_regime_c(1e-9, self.PARAMS, 1.0) < 1e-6

    def test_inflection_is_degenerate_zero(self):
        assert inflection_regime_c(self.PARAMS, 1.0) == 0.0
        assert inflection_regime_c(SystemParams.from_rho_db(4, 2, 3.0, 2.0, 1.0),
                                   0.5) == 0.0

    def test_goodput_bounded_and_nondecreasing(self):
        grid = np.geomspace(1e-3, 1.0, 200)
        vals = [goodput_regime_c(p, self.PARAMS, 1.0) for p in grid]
        assert all(0.0 <= v <= self.PARAMS.rate for v in vals)
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_gaussian_approximation_fidelity_needs_log2e_correction(self):
        """The mean formula's bare "-gamma" term understates the mutual
        information; with the documented log2(e) correction the 8x8
        goodput tracks Monte Carlo within 0.05*R across a 20-point grid,
        while the verbatim form misses by more than 0.5*R."""
        params = self.PARAMS
        grid = np.geomspace(0.005, 1.0, 20)
        mc, _ = upa_gpr_curve_mc(params, McConfig(seed=60, trials=40_000), grid)
        mc_goodput = mc * grid  # back to R*(1 - P_out)
        corrected = np.array([goodput_regime_c(p, params, 1.0, log2e_correction=True)
                              for p in grid])
        verbatim = np.array([goodput_regime_c(p, params, 1.0) for p in grid])
        assert np.max(np.abs(corrected - mc_goodput)) <= 0.05 * params.rate
        assert np.max(np.abs(verbatim - mc_goodput)) > 0.5 * params.rate

    def test_ratio_quasi_concave_all_regimes(self):
        params_a = SystemParams.from_rho_db(2, 64, 10.0, 1.0, 1.0)
        params_b = SystemParams.from_rho_db(64, 2, 10.0, 1.0, 1.0)
        grid = np.geomspace(1e-4, 1.0, 300)
        for f in (lambda p: goodput_regime_a(p, params_a) / p,
                  lambda p: goodput_regime_b(p, params_b) / p,
                  lambda p: goodput_regime_c(p, self.PARAMS, 1.0) / p):
            vals = np.array([f(p) for p in grid])
            ok, _ = unimodality_check(vals, noise_band=0.0)
            assert ok
