import math

import numpy as np
import pytest

from mimoee import (
    GridTooLargeError,
    McConfig,
    PowerAllocation,
    SimplexGrid,
    SystemParams,
    conjecture1_scan,
    exhaustive_best_allocation,
    maximize_upa_gpr,
    miso_upa_gpr,
    schur_extreme_snr_check,
    siso_gpr,
    solve_nu,
    tiso_counterexample,
    trace_logdet_gap,
    trace_logdet_inequality_check,
    unimodality_check,
)
from mimoee.montecarlo import UpaGprMcEvaluator, sample_channel


class TestMaximizeUpaGpr:
    def test_siso_closed_form_peak(self):
        params = SystemParams(n_t=1, n_r=1, sigma2=0.1, rate=1.0, p_max=1.0)
        curve = maximize_upa_gpr(lambda p: siso_gpr(p, params), 1.0, grid_points=64)
        assert curve.p_star == pytest.approx(params.c, rel=1e-6)
        assert curve.extra_peak_indices == ()

    def test_miso_closed_form_peak(self):
        params = SystemParams(n_t=2, n_r=1, sigma2=0.1, rate=1.0, p_max=1.0)
        curve = maximize_upa_gpr(lambda p: miso_upa_gpr(p, params), 1.0, grid_points=64)
        assert curve.p_star == pytest.approx(params.d / solve_nu(2), rel=1e-6)

    def test_refinement_never_below_grid_best(self):
        params = SystemParams(n_t=1, n_r=1, sigma2=0.3, rate=2.0, p_max=5.0)
        curve = maximize_upa_gpr(lambda p: siso_gpr(p, params), 5.0, grid_points=32)
        assert curve.gamma_star >= float(np.max(curve.gammas))

    def test_minimum_grid_size_enforced(self):
        with pytest.raises(ValueError):
            maximize_upa_gpr(lambda p: p, 1.0, grid_points=8)

    def test_monte_carlo_two_by_two(self):
        params = SystemParams.from_rho_db(2, 2, 10.0, 1.0, 1.0)
        ev = UpaGprMcEvaluator(params, McConfig(seed=31, trials=100_000))
        curve = maximize_upa_gpr(ev, 1.0, grid_points=48,
                                 noise_band=4.0 * ev.std_error(0.06))
        # maximizer sits inside the flat top (grid points within 4 SE of
        # the best), stretched by one geometric grid step on either side
        se = ev.std_error(curve.p_star)
        flat = curve.powers[curve.gammas >= float(np.max(curve.gammas)) - 4.0 * se]
        step = (curve.powers[-1] / curve.powers[0]) ** (1.0 / (curve.powers.size - 1))
        assert flat.min() / step <= curve.p_star <= flat.max() * step
        # peak value re-checked against an independent channel set
        other = UpaGprMcEvaluator(params, McConfig(seed=9191, trials=100_000))
        joint = 4.0 * math.hypot(se, other.std_error(curve.p_star))
        assert abs(other(curve.p_star) - curve.gamma_star) <= joint


class TestUnimodalityCheck:
    def test_closed_form_curve_passes_with_zero_band(self):
        params = SystemParams(n_t=1, n_r=1, sigma2=0.1, rate=1.0, p_max=1.0)
        grid = np.geomspace(1e-3, 1.0, 64)
        vals = [siso_gpr(p, params) for p in grid]
        ok, peaks = unimodality_check(np.asarray(vals), noise_band=0.0)
        assert ok and len(peaks) == 1

    def test_two_bump_sequence_reports_both_peaks(self):
        g = np.concatenate([np.linspace(0, 1, 8), np.linspace(0.95, 0.2, 8),
                            np.linspace(0.3, 0.8, 8), np.linspace(0.75, 0.1, 8)])
        ok, peaks = unimodality_check(g, noise_band=0.0)
        assert not ok
        assert len(peaks) == 2

    def test_noise_band_absorbs_small_wiggles(self):
        g = np.array([0.0, 0.2, 0.4, 0.39, 0.6, 0.8, 1.0, 0.9, 0.91, 0.7,
                      0.5, 0.4, 0.41, 0.3, 0.2, 0.1])
        ok, _ = unimodality_check(g, noise_band=0.05)
        assert ok
        ok_strict, _ = unimodality_check(g, noise_band=0.0)
        assert not ok_strict

    def test_needs_sixteen_points(self):
        with pytest.raises(ValueError):
            unimodality_check(np.linspace(0, 1, 8), noise_band=0.0)

    def test_monte_carlo_four_by_four(self):
        params = SystemParams.from_rho_db(4, 4, 10.0, 1.0, 1.0)
        from mimoee import upa_gpr_curve_mc
        grid = np.linspace(1.0 / 40, 1.0, 40)
        gam, err = upa_gpr_curve_mc(params, McConfig(seed=44, trials=100_000), grid)
        ok, _ = unimodality_check(gam, noise_band=4.0 * float(np.max(err)))
        assert ok


class TestSimplexGrid:
    def test_exact_compositions_cover_simplex(self):
        grid = SimplexGrid(3, 4, 1.0)
        comps = list(grid.compositions())
        assert len(comps) == 15  # C(4+3-1, 3-1)
        assert all(sum(c) == 4 for c in comps)
        assert len(set(comps)) == len(comps)

    def test_interior_allocations_unique(self):
        grid = SimplexGrid(2, 8, 1.0)
        allocs = [comp for comp, _ in grid.allocations(exact_total=False)]
        assert len(set(allocs)) == len(allocs)
        assert all(1 <= sum(c) <= 8 for c in allocs)

    def test_one_dimensional_grid(self):
        grid = SimplexGrid(1, 32, 1.0)
        comps = list(grid.compositions())
        assert comps == [(32,)]


class TestExhaustiveSearch:
    def test_low_budget_prefers_beamforming(self):
        pbar = 0.05
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, pbar)
        alloc, _ = exhaustive_best_allocation(params, "success_probability",
                                              SimplexGrid(2, 16, pbar),
                                              McConfig(seed=21, trials=30_000))
        assert alloc.is_beamforming()

    def test_high_budget_prefers_upa(self):
        pbar = 0.5
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, pbar)
        alloc, _ = exhaustive_best_allocation(params, "success_probability",
                                              SimplexGrid(2, 16, pbar),
                                              McConfig(seed=21, trials=30_000))
        assert alloc.is_upa()

    def test_gpr_search_can_leave_budget_unused(self):
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, 1.0)
        alloc, _ = exhaustive_best_allocation(params, "gpr", SimplexGrid(2, 16, 1.0),
                                              McConfig(seed=21, trials=30_000))
        assert alloc.total() < 1.0 - 1e-9

    def test_single_axis_degenerate(self):
        params = SystemParams.from_rho_db(1, 1, 10.0, 1.0, 1.0)
        alloc, _ = exhaustive_best_allocation(params, "gpr", SimplexGrid(1, 32, 1.0),
                                              McConfig(seed=3, trials=30_000))
        # 1-D grid maximizer lands on the rung nearest the closed-form
        # optimum p* = c
        assert abs(alloc.powers[0] - params.c) <= 1.0 / 32

    def test_structure_stable_across_seeds(self):
        for pbar, predicate in [(0.05, PowerAllocation.is_beamforming),
                                (0.5, PowerAllocation.is_upa)]:
            params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, pbar)
            for seed in (101, 202):
                alloc, _ = exhaustive_best_allocation(
                    params, "success_probability", SimplexGrid(2, 16, pbar),
                    McConfig(seed=seed, trials=30_000))
                assert predicate(alloc)

    def test_combinatorial_guard(self):
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, 1.0)
        with pytest.raises(GridTooLargeError):
            exhaustive_best_allocation(params, "gpr", SimplexGrid(2, 128, 1.0),
                                       McConfig(seed=1, trials=10))
        with pytest.raises(ValueError):
            exhaustive_best_allocation(params, "throughput", SimplexGrid(2, 8, 1.0),
                                       McConfig(seed=1, trials=10))


class TestConjecture1Scan:
    def test_two_by_two_threshold_and_regimes(self):
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, 1.0)
        report = conjecture1_scan([0.05, 0.1, 0.15, 0.2, 0.3, 0.4], params,
                                  SimplexGrid(2, 16, 1.0), McConfig(seed=12, trials=30_000))
        assert report.violations == ()
        assert report.threshold_estimate == pytest.approx(0.16, abs=0.05)
        assert report.regimes[0][1] == "beamforming"
        assert report.regimes[-1][1] == "upa"
        # outage-optimal structure: concentrated below, uniform above
        assert report.outage_regimes[0][1] == "beamforming"
        assert report.outage_regimes[-1][1] == "upa"

    def test_intervals_ordered_and_disjoint(self):
        params = SystemParams.from_rho_db(2, 2, 3.0, 1.0, 1.0)
        report = conjecture1_scan([0.05, 0.12, 0.25, 0.4], params,
                                  SimplexGrid(2, 8, 1.0), McConfig(seed=2, trials=10_000))
        spans = [span for span, _ in report.regimes]
        for (lo_a, hi_a), (lo_b, hi_b) in zip(spans, spans[1:]):
            assert hi_a < lo_b


class TestTisoCounterexample:
    PARAMS = SystemParams.from_rho_db(2, 1, 10.0, 3.0, 1.0)

    def test_witness_is_valid(self):
        w = tiso_counterexample(self.PARAMS)
        assert w.gamma_midpoint < w.gamma_level
        assert not w.level_set_convex

    def test_corner_symmetry(self):
        w = tiso_counterexample(self.PARAMS)
        (p1a, p2a, ga), (p1b, p2b, gb), _ = w.points
        assert (p1a, p2a) == (p2b, p1b)
        assert ga == pytest.approx(gb, rel=1e-12)

    def test_q_inside_beamforming_regime(self):
        from mimoee import solve_c_thresholds
        w = tiso_counterexample(self.PARAMS)
        c1 = solve_c_thresholds(2).c_values[0]
        assert 0 < w.q < min(self.PARAMS.p_max, self.PARAMS.c / c1)

    def test_requires_two_by_one(self):
        with pytest.raises(ValueError):
            tiso_counterexample(SystemParams.from_rho_db(2, 2, 10.0, 3.0, 1.0))


class TestSchurExtremeSnr:
    def test_low_snr_beamforming_argmax_closed_form(self):
        params = SystemParams.from_rho_db(2, 1, -10.0, 1.0, 1.0)
        verdict = schur_extreme_snr_check(params, "low", SimplexGrid(2, 20, 1.0),
                                          McConfig(seed=5, trials=100))
        assert verdict.ok
        assert verdict.argmax_structure == "beamforming"

    def test_high_snr_upa_argmax_closed_form(self):
        params = SystemParams.from_rho_db(2, 1, 40.0, 1.0, 1.0)
        verdict = schur_extreme_snr_check(params, "high", SimplexGrid(2, 20, 1.0),
                                          McConfig(seed=5, trials=100))
        assert verdict.ok
        assert verdict.argmax_structure == "upa"

    def test_monte_carlo_path_low_snr(self):
        params = SystemParams.from_rho_db(2, 2, -10.0, 1.0, 1.0)
        verdict = schur_extreme_snr_check(params, "low", SimplexGrid(2, 10, 1.0),
                                          McConfig(seed=5, trials=20_000))
        assert verdict.ok
        assert verdict.argmax_structure == "beamforming"

    def test_regime_preconditions(self):
        params = SystemParams.from_rho_db(2, 1, 10.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            schur_extreme_snr_check(params, "low", SimplexGrid(2, 8, 1.0),
                                    McConfig(seed=1, trials=10))
        with pytest.raises(ValueError):
            schur_extreme_snr_check(params, "high", SimplexGrid(2, 8, 1.0),
                                    McConfig(seed=1, trials=10))


class TestTraceLogdetGap:
    PARAMS = SystemParams.from_rho_db(2, 2, 10.0, 1.0, 1.0)

    def test_zero_allocation_gap_is_zero(self):
        h = sample_channel(self.PARAMS, 1, 0)
        assert trace_logdet_gap(h, [0.0, 0.0], self.PARAMS) == 0.0

    def test_rank_one_value(self):
        # x/(1+x) - log2(1+x) at x = rho*p*|h|^2 = 1 equals -0.5
        params = SystemParams(n_t=1, n_r=1, sigma2=1.0, rate=1.0, p_max=2.0)
        gap = trace_logdet_gap(np.array([[1.0 + 0j]]), [1.0], params)
        assert gap == pytest.approx(-0.5, rel=1e-13)

    def test_thousand_random_instances(self):
        verdict = trace_logdet_inequality_check(1000, self.PARAMS,
                                                McConfig(seed=314, trials=1000))
        assert verdict.ok
        assert verdict.max_gap <= 1e-9
