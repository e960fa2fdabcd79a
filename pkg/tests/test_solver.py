#!/usr/bin/env python3
"""
TV 求解器测试

收缩算子、精确恢复、噪声约束、与独立凸规划参考解的一致性
"""

import numpy as np
import pytest

from core.oracles import difference_matrix, lp_tv_oracle_1d, socp_tv_oracle_2d
from core.sampling import low_frequency_mask, measure, uniform_mask
from core.signals import SignalSpec, gen_piecewise_signal, phantom_2d, relative_error
from core.solver import (
    ReconResult, SolverConfig, TVSolver, ensure_converged, reconstruct, reconstruct_tv_1d,
    reconstruct_tv_2d, residual, soft_threshold,
)
from core.transforms import gradient_1d, tv_norm
from utils.errors import ConvergenceFailure, InputValidationError
from utils.rng import derive_seed, make_rng


def oracle_instance(trial: int, master: int = 77):
    """N <= 32 的实信号、共轭封闭的随机掩码、delta = 0"""
    rng = make_rng(derive_seed(master, "oracle", trial))
    n = int(rng.choice([16, 32]))
    spec = SignalSpec(n=n, s=int(rng.integers(2, 4)), min_sep=0.2)
    x, _ = gen_piecewise_signal(spec, derive_seed(master, "signal", trial))
    x = x.real.astype(complex)
    m = int(rng.integers(n // 4, n // 2))
    mask = uniform_mask(n, m, derive_seed(master, "mask", trial)).symmetrized()
    return measure(x, mask, 0.0, seed=0)


class TestSoftThreshold:
    """复数收缩"""

    def test_values(self):
        out = soft_threshold(np.array([3.0, -0.5, 0.0, 2j]), 1.0)
        assert np.allclose(out, [2.0, 0.0, 0.0, 1j])

    def test_preserves_phase(self):
        v = 3.0 * np.exp(1j * 0.7)
        out = soft_threshold(v, 1.0)
        assert abs(out - 2.0 * np.exp(1j * 0.7)) < 1e-12

    def test_negative_threshold(self):
        with pytest.raises(InputValidationError):
            soft_threshold(np.ones(3), -1.0)


class TestSolverConfig:
    """求解器参数"""

    def test_lambda_alias(self):
        assert SolverConfig(**{"lambda": 2.5}).lam == 2.5
        assert SolverConfig(lam=3.0).lam == 3.0

    def test_from_config_overrides(self):
        config = {"solver": {"lambda": 1.5, "mu": 4.0, "max_outer": 10}}
        cfg = SolverConfig.from_config(config, max_outer=20, mu=None)
        assert cfg.lam == 1.5 and cfg.mu == 4.0 and cfg.max_outer == 20

    def test_invalid(self):
        with pytest.raises(ValueError):
            SolverConfig(mu=-1.0)


class TestReconstruction:
    """重建"""

    def test_exact_recovery_from_low_band(self):
        spec = SignalSpec(n=512, s=4, min_sep=1.0 / 32)
        x, _ = gen_piecewise_signal(spec, seed=17)
        mask = low_frequency_mask(512, 32, 129, seed=0)
        meas = measure(x, mask, 0.0, seed=0)
        result = reconstruct_tv_1d(meas, SolverConfig(max_outer=5000, tol_feas=1e-10))
        assert relative_error(x, result.signal) < 1e-4

    def test_full_sampling_returns_signal(self, rng):
        x = rng.standard_normal(32)
        mask = uniform_mask(32, 32, seed=0)
        result = reconstruct(measure(x, mask, 0.0, seed=0), SolverConfig(max_outer=5000, tol_feas=1e-12))
        assert result.converged
        assert relative_error(x, result.signal) < 1e-8

    def test_stagnant_iterate_keeps_updating(self):
        meas = oracle_instance(1)
        eager = TVSolver(SolverConfig(max_outer=20000, tol_feas=1e-10, tol_rel=0.5)).solve(meas)
        default = TVSolver(SolverConfig(max_outer=20000, tol_feas=1e-10)).solve(meas)
        assert eager.converged
        assert eager.final_residual <= 1e-10 * np.linalg.norm(meas.y)
        assert eager.outer_iterations == default.outer_iterations
        assert np.array_equal(eager.signal, default.signal)

    def test_zero_measurements(self):
        mask = uniform_mask(16, 5, seed=1)
        result = reconstruct(measure(np.zeros(16), mask, 0.0, seed=0))
        assert result.converged
        assert np.all(result.signal == 0)

    def test_noise_constraint_respected(self):
        x, _ = gen_piecewise_signal(SignalSpec.preset("coarse", 128), seed=3)
        mask = uniform_mask(128, 40, seed=2)
        meas = measure(x, mask, 0.5, seed=9)
        result = reconstruct(meas, SolverConfig(max_outer=3000))
        assert result.converged
        assert result.final_residual <= meas.noise_radius * (1 + 1e-8)
        assert abs(residual(meas, result.signal) - result.final_residual) < 1e-6 * max(1.0, result.final_residual)

    def test_histories_recorded(self):
        x, _ = gen_piecewise_signal(SignalSpec.preset("coarse", 64), seed=1)
        meas = measure(x, uniform_mask(64, 20, seed=1), 0.0, seed=0)
        result = TVSolver({"max_outer": 30}).solve(meas)
        assert len(result.residual_history) == result.outer_iterations
        assert len(result.tv_history) == result.outer_iterations
        assert result.final_tv == pytest.approx(tv_norm(result.signal))
        assert "outer_iterations=" in result.metrics_line()

    def test_two_dimensional_residual_decreases(self):
        x = phantom_2d(32)
        mask = uniform_mask(32, 300, seed=4, dim=2)
        meas = measure(x, mask, 0.0, seed=0)
        result = reconstruct_tv_2d(meas, SolverConfig(max_outer=400))
        sampled = result.residual_history[::10]
        assert all(b <= 1.1 * a for a, b in zip(sampled, sampled[1:]))
        assert result.residual_history[-1] < 0.5 * result.residual_history[0]

    def test_two_dimensional_phantom_recovery(self):
        x = phantom_2d(64)
        mask = uniform_mask(64, int(round(0.35 * 64 * 64)), seed=6, dim=2)
        result = reconstruct_tv_2d(measure(x, mask, 0.0, seed=0), SolverConfig(max_outer=500))
        assert relative_error(x, result.signal) < 0.5
        assert result.residual_history[-1] < result.residual_history[0]

    def test_dimension_checks(self):
        meas_2d = measure(np.zeros((8, 8)), uniform_mask(8, 5, seed=0, dim=2), 0.0, seed=0)
        with pytest.raises(InputValidationError):
            reconstruct_tv_1d(meas_2d)
        meas_1d = measure(np.zeros(8), uniform_mask(8, 3, seed=0), 0.0, seed=0)
        with pytest.raises(InputValidationError):
            reconstruct_tv_2d(meas_1d)

    def test_ensure_converged(self):
        result = ReconResult(np.zeros(4), 10, 1.0, 0.0, False)
        with pytest.raises(ConvergenceFailure) as info:
            ensure_converged(result)
        assert info.value.result is result


class TestOracles:
    """独立凸规划参考解"""

    def test_difference_matrix(self, rng):
        z = rng.standard_normal(10)
        assert np.allclose(difference_matrix(10) @ z, gradient_1d(z).real)

    @pytest.mark.parametrize("trial", [1, 26])
    def test_matches_linear_program_on_slow_instances(self, trial):
        meas = oracle_instance(trial)
        oracle = lp_tv_oracle_1d(meas)
        result = TVSolver(SolverConfig(max_outer=20000, tol_feas=1e-10)).solve(meas)
        assert result.converged
        assert abs(result.final_tv - oracle.tv) / max(oracle.tv, 1.0) < 1e-4

    @pytest.mark.slow
    def test_matches_linear_program(self):
        for trial in range(50):
            meas = oracle_instance(trial)
            oracle = lp_tv_oracle_1d(meas)
            result = TVSolver(SolverConfig(max_outer=20000, tol_feas=1e-10)).solve(meas)
            assert abs(result.final_tv - oracle.tv) / max(oracle.tv, 1.0) < 1e-4, f"trial {trial}"

    @pytest.mark.slow
    def test_matches_second_order_cone_program(self):
        x = phantom_2d(8)
        mask = uniform_mask(8, 28, seed=12, dim=2)
        meas = measure(x, mask, 0.0, seed=0)
        oracle = socp_tv_oracle_2d(meas)
        result = TVSolver(SolverConfig(max_outer=5000, tol_feas=1e-10)).solve(meas)
        assert abs(result.final_tv - oracle.tv) / max(oracle.tv, 1.0) < 1e-3

    def test_oracle_guards(self):
        mask = uniform_mask(128, 10, seed=0)
        with pytest.raises(InputValidationError):
            lp_tv_oracle_1d(measure(np.zeros(128), mask, 0.0, seed=0))
        small = uniform_mask(16, 4, seed=0)
        with pytest.raises(InputValidationError):
            lp_tv_oracle_1d(measure(np.ones(16), small, 0.1, seed=0))
