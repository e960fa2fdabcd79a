#!/usr/bin/env python3
"""
线性算子测试

DFT 缩放与逆变换、傅里叶与梯度的交换关系、伴随、Haar 正交性
"""

import math

import numpy as np
import pytest

from core.transforms import (
    adjoint_gradient_1d, adjoint_gradient_2d, dft, dft_1d, dft_2d, freq_to_pos, frequencies,
    frequency_range, gradient_1d, gradient_2d, gradient_multiplier, gradient_symbol_2d, haar_1d,
    haar_2d, haar_basis_1d, haar_basis_2d, idft, idft_1d, idft_2d, ihaar_1d, ihaar_2d,
    pos_to_freq, tv_norm,
)
from utils.errors import InputValidationError


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def scaling_vector(n: int, width: int, shift: int) -> np.ndarray:
    """宽 width 的块上取 width^{-1/2} 的尺度函数"""
    v = np.zeros(n)
    v[shift * width:(shift + 1) * width] = 1.0 / math.sqrt(width)
    return v


def wavelet_vector(n: int, width: int, shift: int) -> np.ndarray:
    """宽 width 的块上前半为正、后半为负的 Haar 小波"""
    v = np.zeros(n)
    half = width // 2
    v[shift * width:shift * width + half] = 1.0 / math.sqrt(width)
    v[shift * width + half:(shift + 1) * width] = -1.0 / math.sqrt(width)
    return v


def tensor_haar_basis(n: int) -> np.ndarray:
    """按金字塔布局逐层写出的二元 Haar 基：尺寸 b 的块内 [0:b, b:2b] 为 Phi Psi，[b:2b, 0:b] 为 Psi Phi，[b:2b, b:2b] 为 Psi Psi"""
    basis = np.zeros((n, n, n, n))
    basis[0, 0] = np.full((n, n), 1.0 / n)
    b = 1
    while b < n:
        width = n // b
        for i in range(b):
            for j in range(b):
                phi_i, psi_i = scaling_vector(n, width, i), wavelet_vector(n, width, i)
                phi_j, psi_j = scaling_vector(n, width, j), wavelet_vector(n, width, j)
                basis[i, b + j] = np.outer(phi_i, psi_j)
                basis[b + i, j] = np.outer(psi_i, phi_j)
                basis[b + i, b + j] = np.outer(psi_i, psi_j)
        b *= 2
    return basis


class TestSpectrumLayout:
    """频率与存储位置"""

    def test_frequencies_even_and_odd(self):
        assert frequencies(8).tolist() == [0, 1, 2, 3, 4, -3, -2, -1]
        assert frequencies(5).tolist() == [0, 1, 2, 3, -1]
        assert frequency_range(8) == (-3, 4)
        assert frequency_range(5) == (-1, 3)

    def test_position_round_trip(self):
        n = 16
        lo, hi = frequency_range(n)
        k = np.arange(lo, hi + 1)
        assert np.array_equal(pos_to_freq(freq_to_pos(k, n), n), k)


class TestDFT:
    """非酉 DFT"""

    def test_matches_definition(self, rng):
        n = 12
        x = random_complex(rng, n)
        j = np.arange(1, n + 1)
        spectrum = dft_1d(x)
        for p, k in enumerate(frequencies(n)):
            expected = np.sum(x * np.exp(2j * np.pi * k * j / n))
            assert abs(spectrum[p] - expected) < 1e-10

    def test_parseval_scaling(self, rng):
        x = random_complex(rng, 64)
        assert abs(np.linalg.norm(dft_1d(x)) ** 2 - 64 * np.linalg.norm(x) ** 2) < 1e-8
        y = random_complex(rng, (16, 16))
        assert abs(np.linalg.norm(dft_2d(y)) ** 2 - 256 * np.linalg.norm(y) ** 2) < 1e-7

    def test_delta_spectrum(self):
        x = np.zeros(8)
        x[0] = 1.0
        assert np.allclose(dft_1d(x), np.exp(2j * np.pi * frequencies(8) / 8), atol=1e-12)

    def test_round_trips(self, rng):
        x = random_complex(rng, 32)
        assert np.max(np.abs(idft_1d(dft_1d(x)) - x)) < 1e-10
        y = random_complex(rng, (8, 8))
        assert np.max(np.abs(idft_2d(dft_2d(y)) - y)) < 1e-10
        assert np.max(np.abs(idft(dft(y)) - y)) < 1e-10

    def test_rejects_bad_input(self):
        with pytest.raises(InputValidationError):
            dft_1d([1.0])
        with pytest.raises(InputValidationError):
            dft_2d(np.zeros((4, 5)))
        with pytest.raises(InputValidationError):
            dft(np.zeros((2, 2, 2)))


class TestGradient:
    """周期梯度"""

    def test_step_signal(self):
        x = np.array([1.0, 1.0, 0.0, 0.0])
        assert np.array_equal(gradient_1d(x).real, [0.0, 1.0, 0.0, -1.0])
        assert tv_norm(x) == 2.0

    def test_constant_has_zero_tv(self):
        assert tv_norm(np.full(16, 3.5)) == 0.0
        assert tv_norm(np.full((8, 8), -1.0)) == 0.0

    def test_fourier_commutation(self, rng):
        n = 32
        v = gradient_multiplier(n)
        for _ in range(100):
            z = random_complex(rng, n)
            assert np.max(np.abs(dft_1d(gradient_1d(z)) - v * dft_1d(z))) < 1e-10

    def test_fourier_commutation_2d(self, rng):
        z = random_complex(rng, (8, 8))
        symbol = gradient_symbol_2d(8)
        assert np.max(np.abs(dft_2d(gradient_2d(z)) - symbol * dft_2d(z))) < 1e-10

    def test_adjoint_1d(self, rng):
        z, u = random_complex(rng, 20), random_complex(rng, 20)
        assert abs(np.vdot(u, gradient_1d(z)) - np.vdot(adjoint_gradient_1d(u), z)) < 1e-10

    def test_adjoint_2d(self, rng):
        # D 为复线性映射，<u, Dz> = <D* u, z>
        z, u = random_complex(rng, (6, 6)), random_complex(rng, (6, 6))
        lhs = np.vdot(u, gradient_2d(z))
        rhs = np.vdot(adjoint_gradient_2d(u), z)
        assert abs(lhs - rhs) < 1e-10

    def test_symbol_vanishes_at_zero(self):
        assert gradient_multiplier(16)[0] == 0
        assert gradient_symbol_2d(16)[0, 0] == 0


class TestHaar:
    """离散 Haar 变换"""

    def test_round_trip_and_norm(self, rng):
        x = random_complex(rng, 64)
        h = haar_1d(x)
        assert abs(np.linalg.norm(h) - np.linalg.norm(x)) < 1e-10
        assert np.max(np.abs(ihaar_1d(h) - x)) < 1e-10

    def test_round_trip_2d(self, rng):
        x = random_complex(rng, (16, 16))
        h = haar_2d(x)
        assert abs(np.linalg.norm(h) - np.linalg.norm(x)) < 1e-10
        assert np.max(np.abs(ihaar_2d(h) - x)) < 1e-10

    def test_scaling_coefficient_is_mean(self, rng):
        x = rng.standard_normal(32)
        assert abs(haar_1d(x)[0] - x.sum() / math.sqrt(32)) < 1e-12

    def test_basis_orthonormal(self):
        basis = haar_basis_1d(16)
        assert np.max(np.abs(basis.T @ basis - np.eye(16))) < 1e-10
        assert np.allclose(basis[:, 0], 0.25)

    def test_basis_2d_orthonormal(self):
        basis = haar_basis_2d(4).reshape(16, 16)
        assert np.max(np.abs(basis @ basis.T - np.eye(16))) < 1e-10

    def test_basis_2d_matches_tensor_construction(self):
        for n in (2, 4, 8):
            assert np.max(np.abs(haar_basis_2d(n) - tensor_haar_basis(n))) < 1e-12

    def test_transform_2d_matches_dense_basis(self, rng):
        n = 8
        x = random_complex(rng, (n, n))
        expected = np.einsum("abij,ij->ab", tensor_haar_basis(n), x)
        assert np.max(np.abs(haar_2d(x) - expected)) < 1e-10
        assert np.max(np.abs(haar_2d(x) - np.einsum("abij,ij->ab", haar_basis_2d(n), x))) < 1e-10

    def test_dilation_ordering(self):
        # 第二个系数为最粗的小波：前半为 +，后半为 -
        psi = haar_basis_1d(8)[:, 1]
        assert np.all(psi[:4] > 0) and np.all(psi[4:] < 0)

    def test_requires_power_of_two(self):
        with pytest.raises(InputValidationError):
            haar_1d(np.zeros(12))
