#!/usr/bin/env python3
"""
测试信号与误差度量测试
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from core.analysis import SupportSet, min_separation
from core.signals import (
    SignalSpec, gen_piecewise_signal, gradient_relative_error, perturb_to_snr, phantom_2d,
    relative_error,
)
from core.transforms import gradient, tv_norm
from utils.errors import InputValidationError


class TestSignalSpec:
    """信号描述"""

    def test_presets(self):
        coarse = SignalSpec.preset("coarse")
        assert (coarse.n, coarse.s) == (512, 4)
        fine = SignalSpec.preset("fine")
        assert fine.s == 16
        phantom = SignalSpec.preset("phantom")
        assert phantom.dim == 2 and phantom.n == 64

    def test_infeasible_separation(self):
        with pytest.raises(ValidationError):
            SignalSpec(n=64, s=8, min_sep=0.25)

    def test_heights_length(self):
        with pytest.raises(ValidationError):
            SignalSpec(n=64, s=3, min_sep=0.1, heights=[1.0, 2.0])
        with pytest.raises(ValidationError):
            SignalSpec(n=64, s=2, min_sep=0.1, heights=[1.0, 1.0])

    def test_unknown_preset(self):
        with pytest.raises(InputValidationError):
            SignalSpec.preset("wavy")


class TestGeneration:
    """信号生成"""

    def test_single_step(self):
        spec = SignalSpec(n=128, s=1, min_sep=0.1, heights=[1.5])
        x, support = gen_piecewise_signal(spec, seed=4)
        assert support.s == 2
        assert support.indices[-1] == 128
        assert tv_norm(x) == pytest.approx(3.0)
        assert SupportSet.from_signal(x).indices.tolist() == support.indices.tolist()

    @pytest.mark.parametrize("seed", range(10))
    def test_separation_realized(self, seed):
        spec = SignalSpec(n=512, s=4, min_sep=1.0 / 32)
        x, support = gen_piecewise_signal(spec, seed)
        assert support.s == 4
        assert min_separation(support) >= 1.0 / 32
        assert np.count_nonzero(np.abs(gradient(x)) > 1e-12) == 4
        assert SupportSet.from_signal(x).indices.tolist() == support.indices.tolist()

    def test_fine_signal(self):
        x, support = gen_piecewise_signal(SignalSpec.preset("fine"), seed=1)
        assert support.s == 16
        assert min_separation(support) >= 1.0 / 64

    def test_explicit_levels(self):
        spec = SignalSpec(n=32, s=3, min_sep=0.2, heights=[0.0, 1.0, 2.0])
        x, _ = gen_piecewise_signal(spec, seed=0)
        assert set(np.round(x.real, 12).tolist()) == {0.0, 1.0, 2.0}

    def test_complex_valued(self):
        spec = SignalSpec(n=64, s=4, min_sep=0.1, complex_valued=True)
        x, _ = gen_piecewise_signal(spec, seed=2)
        assert np.any(x.imag != 0)

    def test_deterministic(self):
        spec = SignalSpec.preset("coarse")
        a, _ = gen_piecewise_signal(spec, seed=12)
        b, _ = gen_piecewise_signal(spec, seed=12)
        assert a.tobytes() == b.tobytes()

    def test_phantom(self):
        x, support = gen_piecewise_signal(SignalSpec.preset("phantom", 32), seed=0)
        assert x.shape == (32, 32)
        assert support is None
        assert len(np.unique(x.real)) == 4
        with pytest.raises(InputValidationError):
            phantom_2d(4)


class TestPerturbation:
    """按 SNR 扰动"""

    def test_exact_snr(self, rng):
        x = rng.standard_normal(256)
        y = perturb_to_snr(x, 20.0, seed=1)
        assert abs(np.linalg.norm(y - x) - np.linalg.norm(x) * 1e-2) < 1e-12
        assert np.all(y.imag == 0)

    def test_infinite_snr(self, rng):
        x = rng.standard_normal(16)
        assert np.array_equal(perturb_to_snr(x, math.inf, seed=1), x)

    def test_seeds_differ_with_same_norm(self, rng):
        x = rng.standard_normal(64)
        a = perturb_to_snr(x, 10.0, seed=1) - x
        b = perturb_to_snr(x, 10.0, seed=2) - x
        assert not np.allclose(a, b)
        assert abs(np.linalg.norm(a) - np.linalg.norm(b)) < 1e-12

    def test_complex_signal(self):
        x = np.exp(1j * np.arange(32))
        y = perturb_to_snr(x, 15.0, seed=3, noise="uniform")
        assert abs(np.linalg.norm(y - x) - np.linalg.norm(x) * 10 ** -1.5) < 1e-12

    def test_zero_signal(self):
        with pytest.raises(InputValidationError):
            perturb_to_snr(np.zeros(8), 10.0, seed=0)


class TestErrors:
    """相对误差"""

    def test_relative_error(self, rng):
        x = rng.standard_normal(32)
        assert relative_error(x, x) == 0.0
        assert relative_error(x, np.zeros(32)) == pytest.approx(1.0)
        assert relative_error(x, 2 * x) == pytest.approx(1.0)

    def test_gradient_relative_error(self):
        x = np.array([0.0, 0.0, 1.0, 1.0])
        assert gradient_relative_error(x, x + 5.0) == pytest.approx(0.0)
        assert gradient_relative_error(x, np.zeros(4)) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(InputValidationError):
            relative_error(np.ones(4), np.ones(5))
        with pytest.raises(InputValidationError):
            relative_error(np.zeros(4), np.ones(4))
