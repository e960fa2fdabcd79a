"""
线性算子模块

非酉 DFT（1D/2D）、周期前向差分梯度及其伴随、离散 Haar 变换，以及基于它们的 TV 范数。

约定：
- 信号在数学上按 1..N 编号，存储时位置 n 对应编号 j = n + 1。
- 频率 k 取 {-floor(N/2)+1, ..., ceil(N/2)}，频谱以 FFT 自然顺序存储，
  位置 p = k mod N；反之 k = p（p <= ceil(N/2)）或 k = p - N。
- (A x)_k = sum_j x_j exp(2 pi i k j / N)，不带 1/sqrt(N)，故 ||A x||^2 = N ||x||^2。
"""

import math
from typing import Tuple

import numpy as np

from utils.errors import require


SQRT2 = math.sqrt(2.0)


def is_power_of_two(n: int) -> bool:
    """判断 n 是否为 2^J（J >= 1）"""
    return n >= 2 and (n & (n - 1)) == 0


def frequencies(n: int) -> np.ndarray:
    """FFT 存储顺序下每个位置对应的有符号频率"""
    positions = np.arange(n)
    return np.where(positions <= (n + 1) // 2, positions, positions - n)


def freq_to_pos(k, n: int):
    """频率 -> 存储位置"""
    return np.mod(k, n)


def pos_to_freq(p, n: int):
    """存储位置 -> 频率"""
    p = np.asarray(p)
    return np.where(p <= (n + 1) // 2, p, p - n)


def frequency_range(n: int) -> Tuple[int, int]:
    """频率下界与上界（含）"""
    return -(n // 2) + 1, (n + 1) // 2


def as_signal_1d(x) -> np.ndarray:
    """校验并转换一维信号"""
    arr = np.asarray(x, dtype=complex)
    require(arr.ndim == 1, f"一维信号应为向量，实际维度 {arr.ndim}")
    require(arr.shape[0] >= 2, f"信号长度至少为 2，实际 {arr.shape[0]}")
    require(bool(np.all(np.isfinite(arr))), "信号含非有限值")
    return arr


def as_signal_2d(x) -> np.ndarray:
    """校验并转换二维信号"""
    arr = np.asarray(x, dtype=complex)
    require(arr.ndim == 2, f"二维信号应为矩阵，实际维度 {arr.ndim}")
    require(arr.shape[0] == arr.shape[1], f"二维信号须为方阵，实际 {arr.shape}")
    require(arr.shape[0] >= 2, f"信号边长至少为 2，实际 {arr.shape[0]}")
    require(bool(np.all(np.isfinite(arr))), "信号含非有限值")
    return arr


def as_signal(x) -> np.ndarray:
    """按维度分派的信号校验"""
    ndim = np.ndim(x)
    require(ndim in (1, 2), f"只支持一维或二维信号，实际维度 {ndim}")
    return as_signal_1d(x) if ndim == 1 else as_signal_2d(x)


def _phase(n: int) -> np.ndarray:
    """exp(2 pi i k / N)：把 0 起始的 FFT 求和平移到 1 起始的编号"""
    return np.exp(2j * np.pi * frequencies(n) / n)


# ---------------------------------------------------------------- DFT

def dft_1d(x) -> np.ndarray:
    """一维非酉 DFT，输出为 FFT 顺序的频谱"""
    x = as_signal_1d(x)
    n = x.shape[0]
    return n * np.fft.ifft(x) * _phase(n)


def idft_1d(spectrum) -> np.ndarray:
    """一维逆 DFT：x = A^{-1} s = (1/N) A* s"""
    s = np.asarray(spectrum, dtype=complex)
    require(s.ndim == 1 and s.shape[0] >= 2, "频谱须为长度至少 2 的向量")
    n = s.shape[0]
    return np.fft.fft(s * np.conj(_phase(n))) / n


def dft_2d(x) -> np.ndarray:
    """二维非酉 DFT"""
    x = as_signal_2d(x)
    n = x.shape[0]
    phase = _phase(n)
    return (n * n) * np.fft.ifft2(x) * np.outer(phase, phase)


def idft_2d(spectrum) -> np.ndarray:
    """二维逆 DFT"""
    s = np.asarray(spectrum, dtype=complex)
    require(s.ndim == 2 and s.shape[0] == s.shape[1] and s.shape[0] >= 2, "二维频谱须为方阵")
    n = s.shape[0]
    phase = np.conj(_phase(n))
    return np.fft.fft2(s * np.outer(phase, phase)) / (n * n)


def dft(x) -> np.ndarray:
    """按维度分派的 DFT"""
    return dft_1d(x) if np.ndim(x) == 1 else dft_2d(x)


def idft(spectrum) -> np.ndarray:
    """按维度分派的逆 DFT"""
    return idft_1d(spectrum) if np.ndim(spectrum) == 1 else idft_2d(spectrum)


# ---------------------------------------------------------------- 梯度

def gradient_multiplier(n: int) -> np.ndarray:
    """v_k = 1 - exp(-2 pi i k / N)，满足 (A D z)_k = v_k (A z)_k"""
    return 1.0 - np.exp(-2j * np.pi * frequencies(n) / n)


def gradient_symbol_2d(n: int) -> np.ndarray:
    """D = D1 + i D2 的傅里叶乘子 v_{k1} + i v_{k2}"""
    v = gradient_multiplier(n)
    return v[:, None] + 1j * v[None, :]


def gradient_1d(x) -> np.ndarray:
    """周期前向差分 (Dz)_j = z_j - z_{j+1}，z_{N+1} := z_1"""
    x = as_signal_1d(x)
    return x - np.roll(x, -1)


def adjoint_gradient_1d(u) -> np.ndarray:
    """D* u：(D*u)_j = u_j - u_{j-1}"""
    u = as_signal_1d(u)
    return u - np.roll(u, 1)


def gradient_components_2d(x) -> Tuple[np.ndarray, np.ndarray]:
    """返回 (D1 x, D2 x)：D1 沿行方向（竖直）差分，D2 沿列方向（水平）差分"""
    x = as_signal_2d(x)
    return x - np.roll(x, -1, axis=0), x - np.roll(x, -1, axis=1)


def gradient_2d(x) -> np.ndarray:
    """复梯度场 D x = D1 x + i D2 x"""
    d1, d2 = gradient_components_2d(x)
    return d1 + 1j * d2


def adjoint_gradient_2d(u) -> np.ndarray:
    """D* u = D1* u - i D2* u（D 为复线性映射）"""
    u = as_signal_2d(u)
    d1_adj = u - np.roll(u, 1, axis=0)
    d2_adj = u - np.roll(u, 1, axis=1)
    return d1_adj - 1j * d2_adj


def gradient(x) -> np.ndarray:
    """按维度分派的梯度"""
    return gradient_1d(x) if np.ndim(x) == 1 else gradient_2d(x)


def tv_norm(x) -> float:
    """||x||_TV = ||D x||_1"""
    x = as_signal(x)
    return float(np.sum(np.abs(gradient(x))))


# ---------------------------------------------------------------- Haar

def _require_dyadic(n: int):
    require(is_power_of_two(n), f"Haar 变换要求 N = 2^J，实际 N = {n}")


def haar_1d(x) -> np.ndarray:
    """离散 Haar 变换，系数按膨胀因子递增排列：Phi, Psi, Psi_{1,0}, Psi_{1,1}, ..."""
    x = as_signal_1d(x)
    n = x.shape[0]
    _require_dyadic(n)

    approx = x
    details = []
    while approx.shape[0] > 1:
        even, odd = approx[0::2], approx[1::2]
        details.append((even - odd) / SQRT2)
        approx = (even + odd) / SQRT2
    return np.concatenate([approx] + details[::-1])


def ihaar_1d(h) -> np.ndarray:
    """逆 Haar 变换"""
    h = np.asarray(h, dtype=complex)
    require(h.ndim == 1, "Haar 系数须为向量")
    n = h.shape[0]
    _require_dyadic(n)

    approx = h[:1]
    width = 1
    while width < n:
        detail = h[width:2 * width]
        nxt = np.empty(2 * width, dtype=complex)
        nxt[0::2] = (approx + detail) / SQRT2
        nxt[1::2] = (approx - detail) / SQRT2
        approx = nxt
        width *= 2
    return approx


def _pair_step(block: np.ndarray, axis: int) -> np.ndarray:
    """沿 axis 做一层 Haar：前半为均值，后半为差分"""
    even = np.take(block, np.arange(0, block.shape[axis], 2), axis=axis)
    odd = np.take(block, np.arange(1, block.shape[axis], 2), axis=axis)
    return np.concatenate([(even + odd) / SQRT2, (even - odd) / SQRT2], axis=axis)


def _pair_unstep(block: np.ndarray, axis: int) -> np.ndarray:
    """_pair_step 的逆"""
    half = block.shape[axis] // 2
    avg = np.take(block, np.arange(half), axis=axis)
    diff = np.take(block, np.arange(half, 2 * half), axis=axis)
    out = np.empty_like(block)
    index_even = [slice(None)] * block.ndim
    index_odd = [slice(None)] * block.ndim
    index_even[axis] = slice(0, None, 2)
    index_odd[axis] = slice(1, None, 2)
    out[tuple(index_even)] = (avg + diff) / SQRT2
    out[tuple(index_odd)] = (avg - diff) / SQRT2
    return out


def haar_2d(x) -> np.ndarray:
    """二元 Haar 变换（金字塔布局）

    每层尺寸为 b 的块内：[0:b, b:2b] 为 Phi(行)Psi(列)，[b:2b, 0:b] 为 Psi(行)Phi(列)，
    [b:2b, b:2b] 为 Psi(行)Psi(列)；[0, 0] 为尺度函数系数。
    """
    x = as_signal_2d(x)
    n = x.shape[0]
    _require_dyadic(n)

    out = x.copy()
    size = n
    while size > 1:
        block = out[:size, :size]
        block = _pair_step(block, axis=0)
        block = _pair_step(block, axis=1)
        out[:size, :size] = block
        size //= 2
    return out


def ihaar_2d(h) -> np.ndarray:
    """逆二元 Haar 变换"""
    h = np.asarray(h, dtype=complex)
    require(h.ndim == 2 and h.shape[0] == h.shape[1], "二维 Haar 系数须为方阵")
    n = h.shape[0]
    _require_dyadic(n)

    out = h.copy()
    size = 2
    while size <= n:
        block = out[:size, :size]
        block = _pair_unstep(block, axis=1)
        block = _pair_unstep(block, axis=0)
        out[:size, :size] = block
        size *= 2
    return out


def haar_basis_1d(n: int) -> np.ndarray:
    """稠密 Haar 基矩阵，第 j 列为 H_j（W* 的列）"""
    _require_dyadic(n)
    return np.stack([ihaar_1d(e).real for e in np.eye(n)], axis=1)


def haar_basis_2d(n: int) -> np.ndarray:
    """稠密二元 Haar 基，basis[j1, j2] 为 H~_{j1,j2}"""
    _require_dyadic(n)
    basis = np.zeros((n, n, n, n))
    for j1 in range(n):
        for j2 in range(n):
            unit = np.zeros((n, n))
            unit[j1, j2] = 1.0
            basis[j1, j2] = ihaar_2d(unit).real
    return basis


def haar(x) -> np.ndarray:
    """按维度分派的 Haar 变换"""
    return haar_1d(x) if np.ndim(x) == 1 else haar_2d(x)
