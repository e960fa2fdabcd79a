"""
测试信号与误差度量

分段常数测试信号（粗、细两种一维信号与二维幻影）、按 SNR 扰动以及相对误差。
"""

import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from utils.errors import require
from utils.rng import make_rng
from .analysis import SupportSet
from .sampling import draw_noise
from .transforms import as_signal, gradient


# 相邻两段电平的最小差
MIN_LEVEL_GAP = 0.2


class SignalSpec(BaseModel):
    """测试信号描述

    s 为梯度跳变个数；s = 1 时为单个台阶，回落跳变位于位置 N（共 2 个跳变点）。
    heights 为各段电平（s = 1 时为台阶高度），缺省时随机生成。
    """

    dim: int = Field(default=1, ge=1, le=2)
    n: int = Field(default=512, ge=2)
    s: int = Field(default=4, ge=1)
    min_sep: float = Field(default=0.2, gt=0, le=1)
    heights: Optional[List[float]] = None
    complex_valued: bool = False
    kind: Literal["coarse", "fine", "phantom", "custom"] = "coarse"
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check_feasible(self):
        if self.kind == "custom":
            if not self.path:
                raise ValueError("custom 信号需要 path")
            return self
        if self.kind == "phantom":
            if self.dim != 2:
                raise ValueError("phantom 信号须为二维")
            return self
        if self.dim != 1:
            raise ValueError(f"{self.kind} 信号须为一维")
        segments = max(self.s, 2)
        gap = math.ceil(self.min_sep * self.n - 1e-9)
        if segments * gap > self.n:
            raise ValueError(f"{segments} 段、最小间隔 {gap} 无法放入 N={self.n}")
        if self.heights is not None:
            expected = 1 if self.s == 1 else self.s
            if len(self.heights) != expected:
                raise ValueError(f"heights 长度须为 {expected}")
            levels = [0.0, self.heights[0]] if self.s == 1 else self.heights
            if any(a == b for a, b in zip(levels, levels[1:] + levels[:1])):
                raise ValueError("相邻段电平须不同，否则跳变个数不足 s")
        return self

    @classmethod
    def preset(cls, name: str, n: Optional[int] = None) -> "SignalSpec":
        """预置信号：coarse（4 个远离的跳变）、fine（16 个密集跳变）、phantom（二维）"""
        if name == "coarse":
            return cls(dim=1, n=n or 512, s=4, min_sep=0.2, kind="coarse")
        if name == "fine":
            return cls(dim=1, n=n or 512, s=16, min_sep=1.0 / 64, kind="fine")
        if name == "phantom":
            return cls(dim=2, n=n or 64, s=1, min_sep=1.0, kind="phantom")
        require(False, f"未知预置信号: {name}")


def _random_levels(rng: np.random.Generator, count: int, complex_valued: bool) -> np.ndarray:
    """相邻（含首尾）电平差不小于 MIN_LEVEL_GAP 的随机电平"""
    levels = np.zeros(count, dtype=complex)
    for k in range(count):
        while True:
            value = rng.uniform(-1.0, 1.0)
            if complex_valued:
                value = value + 1j * rng.uniform(-1.0, 1.0)
            ok = k == 0 or abs(value - levels[k - 1]) >= MIN_LEVEL_GAP
            if ok and k == count - 1 and count > 1:
                ok = abs(value - levels[0]) >= MIN_LEVEL_GAP
            if ok:
                levels[k] = value
                break
    return levels


def _boundaries(rng: np.random.Generator, n: int, count: int, gap: int, offset: bool) -> np.ndarray:
    """count 个环绕间隔均不小于 gap 的跳变位置（1 起始，升序）"""
    extras = n - count * gap
    gaps = gap + rng.multinomial(extras, np.full(count, 1.0 / count))
    shift = int(rng.integers(0, n)) if offset else 0
    positions = (shift + np.cumsum(gaps) - 1) % n + 1
    return np.sort(positions)


def _piecewise(n: int, boundaries: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """x_j = levels[第几段]，跳变位于 boundaries 处（x_b != x_{b+1}）"""
    j = np.arange(1, n + 1)
    segment = np.searchsorted(boundaries, j, side="left") % boundaries.size
    return levels[segment]


def phantom_2d(n: int) -> np.ndarray:
    """分段常数二维幻影：矩形、圆盘与小方块"""
    require(n >= 8, f"幻影边长至少为 8，实际 {n}")
    rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    image = np.zeros((n, n))
    image[n // 8: n // 2, n // 4: 3 * n // 4] = 1.0
    disk = (rows - 0.65 * n) ** 2 + (cols - 0.6 * n) ** 2 <= (0.18 * n) ** 2
    image[disk] = 0.5
    image[3 * n // 4: 7 * n // 8, n // 8: n // 4] = -0.5
    return image.astype(complex)


def gen_piecewise_signal(spec: SignalSpec, seed: int) -> Tuple[np.ndarray, Optional[SupportSet]]:
    """按描述生成信号，一维时同时返回真实梯度支撑"""
    if spec.kind == "custom":
        from utils.file_formats import read_signal
        x, _ = read_signal(spec.path)
        support = SupportSet.from_signal(x) if x.ndim == 1 and np.any(gradient(x)) else None
        return x, support
    if spec.kind == "phantom":
        return phantom_2d(spec.n), None

    rng = make_rng(seed)
    gap = math.ceil(spec.min_sep * spec.n - 1e-9)
    if spec.s == 1:
        # 单个台阶：第二个跳变固定在 N
        boundaries = _boundaries(rng, spec.n, 2, gap, offset=False)
        if spec.heights:
            height = spec.heights[0]
        else:
            pair = _random_levels(rng, 2, spec.complex_valued)
            height = pair[1] - pair[0]
        levels = np.array([0.0, height], dtype=complex)
    else:
        boundaries = _boundaries(rng, spec.n, spec.s, gap, offset=True)
        levels = (np.asarray(spec.heights, dtype=complex) if spec.heights
                  else _random_levels(rng, spec.s, spec.complex_valued))
        # levels[k] 为第 k 个跳变之后那一段的电平；第 0 段跨越环绕
        levels = np.roll(levels, 1)

    x = _piecewise(spec.n, boundaries, levels)
    support = SupportSet(boundaries, spec.n)
    logger.debug(f"生成 {spec.kind} 信号: N={spec.n}, 跳变位置 {boundaries.tolist()}")
    return x, support


def perturb_to_snr(x, snr_db: float, seed: int, noise: str = "gaussian") -> np.ndarray:
    """x + e，||e||_2 = ||x||_2 · 10^(-snr/10)；snr = inf 时 e = 0；实信号得到实扰动"""
    x = as_signal(x)
    norm = float(np.linalg.norm(x))
    require(norm > 0, "零信号无法按 SNR 扰动")
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    require(noise in ("gaussian", "uniform"), f"未知噪声类型: {noise}")
    radius = norm * 10.0 ** (-snr_db / 10.0)

    if np.all(x.imag == 0):
        rng = make_rng(seed)
        e = rng.standard_normal(x.shape) if noise == "gaussian" else rng.uniform(-1.0, 1.0, x.shape)
        e = e * (radius / np.linalg.norm(e))
    else:
        e = draw_noise(x.size, radius, seed, noise).reshape(x.shape)
    return x + e


def relative_error(truth, recon) -> float:
    """||R - I||_2 / ||I||_2"""
    truth = np.asarray(truth, dtype=complex)
    recon = np.asarray(recon, dtype=complex)
    require(truth.shape == recon.shape, f"形状不一致: {truth.shape} vs {recon.shape}")
    norm = float(np.linalg.norm(truth))
    require(norm > 0, "真值为零信号，相对误差无定义")
    return float(np.linalg.norm(recon - truth)) / norm


def gradient_relative_error(truth, recon) -> float:
    """||D(R - I)||_2 / ||D I||_2"""
    truth = as_signal(truth)
    recon = np.asarray(recon, dtype=complex)
    require(truth.shape == recon.shape, f"形状不一致: {truth.shape} vs {recon.shape}")
    grad_norm = float(np.linalg.norm(gradient(truth)))
    require(grad_norm > 0, "真值梯度为零，梯度相对误差无定义")
    return float(np.linalg.norm(gradient(recon - truth))) / grad_norm
