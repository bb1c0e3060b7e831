import math

import numpy as np
import pytest

from symphmc import (
    ExactGaussianFlow,
    HmcConfig,
    anharmonic_model,
    efficiency_curve,
    energy,
    gaussian_model,
    hmc_run,
    oscillator_1d,
    PhaseState,
    rho,
    stability_length,
)
from symphmc.catalog import named_integrator
from symphmc.hmc import fast_path_available

ROW2 = named_integrator("proc-3.0")


def batch_means_se(x, n_batches=50):
    usable = (len(x) // n_batches) * n_batches
    means = x[:usable].reshape(n_batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(n_batches)


class TestEnergy:
    def test_simple_values(self):
        tgt = oscillator_1d()
        assert energy(tgt, PhaseState([1.0], [1.0])) == 1.0
        assert energy(tgt, PhaseState([0.0], [0.0])) == 0.0

    def test_invariant_under_momentum_flip(self):
        tgt = gaussian_model(3)
        s = PhaseState(np.array([0.1, -0.4, 0.2]), np.array([1.0, 0.3, -0.7]))
        from symphmc import momentum_flip

        assert energy(tgt, s) == energy(tgt, momentum_flip(s))


class TestConfig:
    def test_step_rounding(self):
        cfg = HmcConfig(h=0.5, n_samples=1, seed=0, integrator=ROW2, leg_time=5.0)
        assert cfg.n_steps == 10
        big = HmcConfig(h=12.0, n_samples=1, seed=0, integrator=ROW2, leg_time=5.0)
        assert big.n_steps == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            HmcConfig(h=0.0, n_samples=1, seed=0, integrator=ROW2)
        with pytest.raises(ValueError):
            HmcConfig(h=0.1, n_samples=0, seed=0, integrator=ROW2)
        with pytest.raises(ValueError):
            HmcConfig(h=0.1, n_samples=1, seed=0, integrator=ROW2, leg_time=0.0)


class TestHmcRun:
    def test_exact_flow_accepts_everything(self):
        cfg = HmcConfig(h=0.35, n_samples=500, seed=3, integrator=ExactGaussianFlow(), leg_time=5.0)
        _, stats = hmc_run(gaussian_model(6), cfg)
        assert stats.acceptance_rate == 1.0
        assert stats.grad_evals == 0
        assert stats.accept_per_grad == math.inf

    def test_exact_flow_requires_gaussian(self):
        cfg = HmcConfig(h=0.35, n_samples=5, seed=3, integrator=ExactGaussianFlow())
        with pytest.raises(TypeError):
            hmc_run(anharmonic_model(2), cfg)

    def test_deterministic_given_seed(self):
        cfg = HmcConfig(h=0.3, n_samples=200, seed=711, integrator=ROW2, leg_time=5.0)
        s1, st1 = hmc_run(gaussian_model(5), cfg)
        s2, st2 = hmc_run(gaussian_model(5), cfg)
        assert np.array_equal(s1, s2)
        assert st1.accepted == st2.accepted
        assert np.array_equal(st1.energy_errors, st2.energy_errors)

    def test_fast_path_matches_generic_execution(self):
        tgt = gaussian_model(6)
        cfg = HmcConfig(h=0.35, n_samples=300, seed=42, integrator=ROW2, leg_time=5.0)
        assert fast_path_available(tgt, ROW2)
        s_fast, st_fast = hmc_run(tgt, cfg, use_fast_path=True)
        s_gen, st_gen = hmc_run(tgt, cfg, use_fast_path=False)
        assert st_fast.accepted == st_gen.accepted
        assert st_fast.grad_evals == st_gen.grad_evals
        assert np.max(np.abs(s_fast - s_gen)) <= 1e-10
        assert np.max(np.abs(st_fast.energy_errors - st_gen.energy_errors)) <= 1e-10

    def test_fast_path_rejected_for_nonlinear_target(self):
        tgt = anharmonic_model(2)
        assert not fast_path_available(tgt, ROW2)
        cfg = HmcConfig(h=0.2, n_samples=3, seed=0, integrator=ROW2)
        with pytest.raises(ValueError):
            hmc_run(tgt, cfg, use_fast_path=True)

    def test_nonlinear_target_chain(self):
        # no exact sampler: the chain starts at the origin and mixes from there
        cfg = HmcConfig(h=0.25, n_samples=400, seed=6, integrator=ROW2, leg_time=5.0)
        samples, stats = hmc_run(anharmonic_model(2), cfg)
        assert np.all(np.isfinite(samples))
        assert 0.5 < stats.acceptance_rate <= 1.0
        assert stats.grad_evals == stats.proposed * (3 * cfg.n_steps + 5)

    def test_exact_flow_generic_path_matches_fast(self):
        tgt = gaussian_model(4)
        cfg = HmcConfig(h=0.3, n_samples=50, seed=13, integrator=ExactGaussianFlow(), leg_time=5.0)
        s_fast, st_fast = hmc_run(tgt, cfg, use_fast_path=True)
        s_gen, st_gen = hmc_run(tgt, cfg, use_fast_path=False)
        assert st_fast.acceptance_rate == st_gen.acceptance_rate == 1.0
        assert np.max(np.abs(s_fast - s_gen)) <= 1e-12

    def test_grad_accounting(self):
        cfg = HmcConfig(h=0.5, n_samples=40, seed=9, integrator=ROW2, leg_time=5.0)
        _, stats = hmc_run(gaussian_model(4), cfg)
        assert stats.proposed == 40
        assert stats.grad_per_leg == 3 * cfg.n_steps + 5
        assert stats.accept_per_grad == 100.0 * stats.acceptance_rate / stats.grad_per_leg

    def test_acceptance_collapses_beyond_scaled_stability(self):
        d = 64
        h_kernel = stability_length(ROW2.kernel)
        cfg = HmcConfig(h=1.05 * h_kernel / d, n_samples=400, seed=5, integrator=ROW2, leg_time=5.0)
        _, stats = hmc_run(gaussian_model(d), cfg)
        assert stats.acceptance_rate < 0.05

    def test_rejection_keeps_position(self):
        d = 64
        h_kernel = stability_length(ROW2.kernel)
        cfg = HmcConfig(h=1.3 * h_kernel / d, n_samples=10, seed=1, integrator=ROW2, leg_time=5.0)
        samples, stats = hmc_run(gaussian_model(d), cfg)
        assert stats.accepted == 0
        assert np.all(np.isfinite(samples))
        for m in range(1, samples.shape[0]):
            assert np.array_equal(samples[m], samples[0])

    def test_generic_path_stationarity_small(self):
        cfg = HmcConfig(h=0.5, n_samples=5000, seed=21, integrator=ROW2, leg_time=5.0)
        samples, _ = hmc_run(oscillator_1d(), cfg, use_fast_path=False)
        q2 = samples[:, 0] ** 2
        se = batch_means_se(q2)
        assert abs(q2.mean() - 1.0) <= 5 * se

    def test_mean_energy_error_within_per_mode_bound(self):
        d, h = 32, 0.06
        cfg = HmcConfig(h=h, n_samples=4000, seed=77, integrator=ROW2, leg_time=5.0)
        _, stats = hmc_run(gaussian_model(d), cfg)
        dh = stats.energy_errors
        se = dh.std(ddof=1) / math.sqrt(dh.size)
        bound = sum(rho(ROW2, h * j) for j in range(1, d + 1))
        assert dh.mean() >= -3 * se  # expected energy error is non-negative
        assert dh.mean() <= bound + 3 * se


class TestEfficiencyCurve:
    def test_seeds_and_best_flag(self):
        tgt = gaussian_model(16)
        h_list = [0.02, 0.05, 0.1]
        cfg = HmcConfig(h=h_list[0], n_samples=150, seed=1000, integrator=ROW2, leg_time=5.0)
        points = efficiency_curve(tgt, ROW2, h_list, cfg)
        assert [pt.seed for pt in points] == [1000 ^ 0, 1000 ^ 1, 1000 ^ 2]
        assert sum(pt.best for pt in points) == 1
        best = max(points, key=lambda p: p.accept_per_grad)
        assert best.best

    def test_empty_h_list(self):
        cfg = HmcConfig(h=0.1, n_samples=10, seed=0, integrator=ROW2)
        assert efficiency_curve(gaussian_model(4), ROW2, [], cfg) == []

    def test_worker_count_does_not_change_results(self):
        tgt = gaussian_model(16)
        h_list = [0.02, 0.06]
        cfg = HmcConfig(h=h_list[0], n_samples=100, seed=4, integrator=ROW2, leg_time=5.0)
        serial = efficiency_curve(tgt, ROW2, h_list, cfg, workers=1)
        parallel = efficiency_curve(tgt, ROW2, h_list, cfg, workers=2)
        assert serial == parallel

    def test_efficiency_ordering_at_moderate_dimension(self):
        # the multistage integrators beat verlet per gradient at d = 256 too,
        # with the processed set on top
        from symphmc.cli import default_h_grid

        dim = 256
        target = gaussian_model(dim)
        best = {}
        for name in ("leapfrog", "blcasa", "proc-3.0"):
            integ = named_integrator(name)
            grid = default_h_grid(name, dim, 8)
            cfg = HmcConfig(h=grid[0], n_samples=1000, seed=7, integrator=integ, leg_time=5.0)
            points = efficiency_curve(target, integ, grid, cfg)
            best[name] = max(pt.accept_per_grad for pt in points)
        assert best["proc-3.0"] > best["blcasa"] > best["leapfrog"]

    def test_acceptance_nonincreasing_up_to_noise(self):
        d = 64
        tgt = gaussian_model(d)
        h_kernel = stability_length(ROW2.kernel)
        h_list = list(np.geomspace(0.3 * h_kernel / d, 0.95 * h_kernel / d, 6))
        n = 400
        cfg = HmcConfig(h=h_list[0], n_samples=n, seed=8, integrator=ROW2, leg_time=5.0)
        points = efficiency_curve(tgt, ROW2, h_list, cfg)
        for lo, hi in zip(points, points[1:]):
            a1, a2 = lo.acceptance_pct / 100, hi.acceptance_pct / 100
            noise = math.sqrt((a1 * (1 - a1) + a2 * (1 - a2)) / n + 1e-12)
            assert a2 <= a1 + 3 * noise
