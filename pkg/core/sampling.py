"""
频率采样模块

生成各类频率采样掩码（均匀、幂律、低频带、多层、伯努利、并集），并产生带噪测量。
所有随机性由 64 位种子经 PCG64 决定，相同 (方案, N, m, seed) 得到逐字节相同的掩码。
"""

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from utils.errors import InputValidationError, require
from utils.rng import derive_seed, make_rng, normalize_seed
from .transforms import dft, frequency_range, freq_to_pos


SchemeVariant = Literal[
    "uniform", "power_law_1d", "power_law_2d", "low_frequency",
    "multilevel", "bernoulli", "lowest", "union",
]

# 标签中各方案的参数（顺序即序列化顺序）
_TAG_PARAMS = {
    "low_frequency": ("M",),
    "multilevel": ("L", "a", "b", "full_band_radius"),
    "bernoulli": ("q", "M"),
}


class SamplingScheme(BaseModel):
    """采样方案描述"""

    variant: SchemeVariant = "uniform"
    dim: int = Field(default=1, ge=1, le=2)
    M: Optional[int] = Field(default=None, ge=1)
    L: int = Field(default=25, ge=1)
    a: float = Field(default=2.2, gt=0)
    b: float = Field(default=6.5, gt=0)
    full_band_radius: int = Field(default=5, ge=0)
    q: Optional[float] = Field(default=None, gt=0, le=1)
    components: List["SamplingScheme"] = Field(default_factory=list)
    shares: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_variant(self):
        if self.variant in ("low_frequency", "bernoulli") and self.M is None:
            raise ValueError(f"{self.variant} 方案需要参数 M")
        if self.variant == "bernoulli" and self.q is None:
            raise ValueError("bernoulli 方案需要参数 q")
        if self.variant in ("power_law_2d", "multilevel"):
            self.dim = 2
        if self.variant == "union":
            if not self.components:
                raise ValueError("union 方案至少需要一个子方案")
            if self.shares is not None:
                if len(self.shares) != len(self.components):
                    raise ValueError("shares 数量须与子方案数量一致")
                if any(s < 0 for s in self.shares) or sum(self.shares) <= 0:
                    raise ValueError("shares 须为非负且和为正")
            dims = {c.dim for c in self.components}
            if len(dims) != 1:
                raise ValueError("union 子方案维度须一致")
            self.dim = dims.pop()
        return self

    def tag(self) -> str:
        """无空格的文本标签，用于掩码文件头"""
        if self.variant == "union":
            return "union(" + "+".join(c.tag() for c in self.components) + ")"
        names = _TAG_PARAMS.get(self.variant, ())
        if self.variant == "uniform" and self.dim == 2:
            return "uniform(dim=2)"
        if self.variant == "lowest":
            return f"lowest(dim={self.dim})"
        if not names:
            return self.variant
        params = ",".join(f"{name}={getattr(self, name)}" for name in names)
        return f"{self.variant}({params})"

    @classmethod
    def from_tag(cls, text: str) -> "SamplingScheme":
        """解析 tag() 生成的标签"""
        text = text.strip()
        match = re.fullmatch(r"([a-z_0-9]+)(?:\((.*)\))?", text)
        require(match is not None, f"无法解析采样方案标签: {text!r}")
        name, body = match.group(1), match.group(2)

        if name == "union":
            require(bool(body), "union 标签缺少子方案")
            return cls(variant="union", components=[cls.from_tag(part) for part in _split_top_level(body)])

        params: Dict[str, Any] = {}
        if body:
            for item in body.split(","):
                require("=" in item, f"方案参数格式错误: {item!r}")
                key, value = item.split("=", 1)
                params[key.strip()] = _parse_number(value.strip())
        try:
            return cls(variant=name, **params)
        except ValueError as e:
            raise InputValidationError(f"无效的采样方案标签 {text!r}: {e}") from e


SamplingScheme.model_rebuild()


def _split_top_level(body: str) -> List[str]:
    """按最外层的 '+' 切分 union 子标签"""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    parts.append(body[start:])
    return [p for p in parts if p]


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _in_range(indices: np.ndarray, n: int) -> bool:
    lo, hi = frequency_range(n)
    return bool(np.all((indices >= lo) & (indices <= hi)))


@dataclass(eq=False)
class SamplingMask:
    """频率索引多重集及其元数据

    indices: 一维为 (draws,)，二维为 (draws, 2) 的有符号整数频率；重复项保留。
    m: 声明的抽样次数（噪声约束 sqrt(m)·delta 使用此值）。
    """

    indices: np.ndarray
    n: int
    dim: int
    m: int
    includes_zero: bool
    scheme: SamplingScheme
    seed: int = 0

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        require(self.dim in (1, 2), f"掩码维度须为 1 或 2，实际 {self.dim}")
        require(self.n >= 2, f"N 至少为 2，实际 {self.n}")
        if self.dim == 1:
            self.indices = self.indices.reshape(-1)
        else:
            self.indices = self.indices.reshape(-1, 2)
        require(_in_range(self.indices, self.n), "掩码索引超出频谱范围")
        if self.includes_zero:
            require(bool(np.any(np.all(self.indices.reshape(-1, self.dim) == 0, axis=1))),
                    "标记包含零频但掩码中没有 0")
        self.seed = normalize_seed(self.seed)

    @property
    def size(self) -> int:
        """抽样条数（含重复）"""
        return int(self.indices.shape[0])

    def unique(self) -> np.ndarray:
        """去重后的索引（排序）"""
        if self.dim == 1:
            return np.unique(self.indices)
        return np.unique(self.indices, axis=0)

    def counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """(去重索引, 重数)"""
        if self.dim == 1:
            return np.unique(self.indices, return_counts=True)
        return np.unique(self.indices, axis=0, return_counts=True)

    def has_duplicates(self) -> bool:
        return self.unique().shape[0] < self.size

    def positions(self):
        """每条抽样在 FFT 存储顺序中的位置（二维返回行、列两个数组）"""
        pos = freq_to_pos(self.indices, self.n)
        if self.dim == 1:
            return pos
        return pos[:, 0], pos[:, 1]

    def multiplicity(self) -> np.ndarray:
        """FFT 顺序的重数网格"""
        shape = (self.n,) if self.dim == 1 else (self.n, self.n)
        grid = np.zeros(shape)
        np.add.at(grid, self.positions(), 1.0)
        return grid

    def within_band(self, M: int) -> bool:
        """所有索引是否位于 {-2M, ..., 2M}（逐轴）"""
        return bool(np.all(np.abs(self.indices) <= 2 * M))

    def symmetrized(self) -> "SamplingMask":
        """补全 -k，使实信号的测量在共轭下封闭"""
        lo, hi = frequency_range(self.n)
        present = {tuple(np.atleast_1d(k)) for k in self.indices}
        extra = []
        for k in self.unique():
            mirror = tuple(-np.atleast_1d(k))
            if mirror in present or any(v < lo or v > hi for v in mirror):
                continue
            present.add(mirror)
            extra.append(mirror)
        if not extra:
            return self
        added = np.array(extra, dtype=np.int64)
        if self.dim == 1:
            added = added.reshape(-1)
        indices = np.concatenate([self.indices, added], axis=0)
        return SamplingMask(indices, self.n, self.dim, int(indices.shape[0]),
                            self.includes_zero, self.scheme, self.seed)


def _all_frequencies(n: int, dim: int) -> np.ndarray:
    """按升序列出全部频率（二维为行优先的 (k1, k2) 对）"""
    lo, hi = frequency_range(n)
    k = np.arange(lo, hi + 1)
    if dim == 1:
        return k
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    return np.stack([k1.ravel(), k2.ravel()], axis=1)


def _adjoin_zero(indices: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return indices if np.any(indices == 0) else np.concatenate([indices, [0]])
    if np.any(np.all(indices == 0, axis=1)):
        return indices
    return np.concatenate([indices, np.zeros((1, 2), dtype=np.int64)], axis=0)


# ---------------------------------------------------------------- 方案实现

def uniform_mask(n: int, m: int, seed: int, dim: int = 1) -> SamplingMask:
    """无放回均匀抽取 m 个频率，再并入 0"""
    total = n if dim == 1 else n * n
    require(dim in (1, 2), f"维度须为 1 或 2，实际 {dim}")
    require(1 <= m <= total, f"均匀采样要求 1 <= m <= {total}，实际 m = {m}")

    rng = make_rng(seed)
    support = _all_frequencies(n, dim)
    chosen = rng.choice(support.shape[0], size=m, replace=False)
    indices = _adjoin_zero(support[chosen], dim)
    logger.debug(f"均匀采样: N={n}, dim={dim}, m={m}, |Ω|={indices.shape[0]}")
    return SamplingMask(indices, n, dim, m, True, SamplingScheme(variant="uniform", dim=dim), seed)


def power_law_probabilities(n: int, dim: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """幂律密度 p ∝ 1/max(1, |n|)（一维）或 1/max(1, n^2 + m^2)（二维）

    log(N) 因子被归一化常数吸收。返回 (升序频率, 概率)。
    """
    support = _all_frequencies(n, dim)
    if dim == 1:
        weights = 1.0 / np.maximum(1, np.abs(support))
    else:
        weights = 1.0 / np.maximum(1, support[:, 0] ** 2 + support[:, 1] ** 2)
    return support, weights / weights.sum()


def _power_law_mask(n: int, m: int, seed: int, dim: int, include_zero: bool) -> SamplingMask:
    require(m >= 1, f"抽样次数须为正，实际 m = {m}")
    require(n >= 4, f"幂律采样要求 N >= 4，实际 N = {n}")
    support, probs = power_law_probabilities(n, dim)
    rng = make_rng(seed)
    draws = rng.choice(support.shape[0], size=m, replace=True, p=probs)
    indices = support[draws]
    if include_zero:
        indices = _adjoin_zero(indices, dim)
    variant = "power_law_1d" if dim == 1 else "power_law_2d"
    logger.debug(f"幂律采样: N={n}, dim={dim}, m={m}, 去重后 {np.unique(indices, axis=0).shape[0]} 个")
    return SamplingMask(indices, n, dim, m, include_zero, SamplingScheme(variant=variant), seed)


def power_law_mask_1d(n: int, m: int, seed: int, include_zero: bool = True) -> SamplingMask:
    """一维幂律 i.i.d. 有放回采样"""
    return _power_law_mask(n, m, seed, 1, include_zero)


def power_law_mask_2d(n: int, m: int, seed: int, include_zero: bool = True) -> SamplingMask:
    """二维幂律 i.i.d. 有放回采样"""
    return _power_law_mask(n, m, seed, 2, include_zero)


def _band(n: int, M: int) -> np.ndarray:
    """频带 {-2M, ..., 2M}，按 N 周期折回频谱范围；4M = N 时 -2M 与 2M 是同一频率"""
    require(M >= 1, f"频带参数 M 须为正，实际 {M}")
    require(4 * M <= n, f"频带 [-{2 * M}, {2 * M}] 要求 4M <= N，实际 M={M}, N={n}")
    lo, _ = frequency_range(n)
    return (np.arange(-2 * M, 2 * M + 1) - lo) % n + lo


def low_frequency_mask(n: int, M: int, m: int, seed: int) -> SamplingMask:
    """在 {-2M, ..., 2M} 中无放回均匀抽取 m 个，并入 0；m = 4M+1 时取满频带"""
    band = _band(n, M)
    band_size = band.shape[0]
    require(1 <= m <= band_size, f"低频采样要求 1 <= m <= 4M+1 = {band_size}，实际 m = {m}")
    if M < 10:
        logger.warning(f"低频采样 M={M} 小于 10，超出理论保证的参数范围")

    if m == band_size:
        indices = band
    else:
        rng = make_rng(seed)
        indices = _adjoin_zero(band[rng.choice(band_size, size=m, replace=False)], 1)
    scheme = SamplingScheme(variant="low_frequency", M=M)
    return SamplingMask(indices, n, 1, m, True, scheme, seed)


def multilevel_probabilities(n: int, L: int = 25, a: float = 2.2, b: float = 6.5
                             ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """多层密度：按欧氏频率半径把频谱分成 L 个等宽环，第 l 层每个索引的权重为 exp(-(b l / L)^a)

    返回 (频率对, 概率, 层号)。
    """
    require(L >= 1, f"层数 L 须为正，实际 {L}")
    require(a > 0 and b > 0, f"参数 a, b 须为正，实际 a={a}, b={b}")
    support = _all_frequencies(n, 2)
    radius = np.hypot(support[:, 0], support[:, 1])
    r_max = radius.max()
    levels = np.clip(np.ceil(radius / r_max * L), 1, L).astype(np.int64)
    weights = np.exp(-(b * levels / L) ** a)
    return support, weights / weights.sum(), levels


def multilevel_mask(n: int, m: int, seed: int, L: int = 25, a: float = 2.2, b: float = 6.5,
                    full_band_radius: int = 5) -> SamplingMask:
    """二维多层采样：低频全采样块并上 m 次按层密度的 i.i.d. 抽样"""
    require(m >= 0, f"抽样次数不能为负，实际 m = {m}")
    support, probs, _ = multilevel_probabilities(n, L, a, b)
    full_band = support[np.max(np.abs(support), axis=1) <= full_band_radius]

    rng = make_rng(seed)
    draws = support[rng.choice(support.shape[0], size=m, replace=True, p=probs)]
    indices = np.concatenate([full_band, draws], axis=0)
    scheme = SamplingScheme(variant="multilevel", L=L, a=a, b=b, full_band_radius=full_band_radius)
    logger.debug(f"多层采样: N={n}, 低频块 {full_band.shape[0]} 个, 随机抽样 {m} 次")
    return SamplingMask(indices, n, 2, int(indices.shape[0]), True, scheme, seed)


def bernoulli_mask(M: int, q: float, seed: int, n: Optional[int] = None,
                   include_zero: bool = False) -> SamplingMask:
    """伯努利模型：{-2M, ..., 2M} 中每个索引独立以概率 q 入选"""
    require(0 < q <= 1, f"q 须位于 (0, 1]，实际 {q}")
    n = n if n is not None else 4 * M + 2
    band = _band(n, M)
    rng = make_rng(seed)
    indices = band[rng.random(band.shape[0]) < q]
    if include_zero:
        indices = _adjoin_zero(indices, 1)
    scheme = SamplingScheme(variant="bernoulli", q=q, M=M)
    return SamplingMask(indices, n, 1, int(indices.shape[0]), include_zero and indices.size > 0, scheme, seed)


def lowest_frequency_mask(n: int, m: int, dim: int = 1) -> SamplingMask:
    """按欧氏模长取最低的 m 个频率（确定性）；一维中模长相同时正频率优先"""
    support = _all_frequencies(n, dim)
    require(1 <= m <= support.shape[0], f"要求 1 <= m <= {support.shape[0]}，实际 m = {m}")
    if dim == 1:
        order = np.lexsort((-support, np.abs(support)))
    else:
        order = np.lexsort((-support[:, 1], -support[:, 0], support[:, 0] ** 2 + support[:, 1] ** 2))
    indices = support[order[:m]]
    return SamplingMask(indices, n, dim, m, True, SamplingScheme(variant="lowest", dim=dim), 0)


def union_masks(*masks: SamplingMask, shares: Optional[List[float]] = None) -> SamplingMask:
    """掩码并集（多重集拼接）"""
    require(len(masks) >= 1, "至少需要一个掩码")
    first = masks[0]
    for mask in masks[1:]:
        require(mask.n == first.n and mask.dim == first.dim, "并集的掩码须具有相同 N 与维度")
    indices = np.concatenate([mask.indices for mask in masks], axis=0)
    scheme = SamplingScheme(variant="union", components=[mask.scheme for mask in masks], shares=shares)
    return SamplingMask(indices, first.n, first.dim, sum(mask.m for mask in masks),
                        any(mask.includes_zero for mask in masks), scheme, first.seed)


def split_count(m: int, shares: List[float]) -> List[int]:
    """按份额拆分抽样次数，余数归最后一个子方案"""
    total = float(sum(shares))
    counts = [int(round(m * share / total)) for share in shares[:-1]]
    counts.append(m - sum(counts))
    return counts


def build_mask(scheme: SamplingScheme, n: int, m: int, seed: int) -> SamplingMask:
    """按方案分派生成掩码"""
    variant = scheme.variant
    if variant == "uniform":
        return uniform_mask(n, m, seed, dim=scheme.dim)
    if variant == "power_law_1d":
        return power_law_mask_1d(n, m, seed)
    if variant == "power_law_2d":
        return power_law_mask_2d(n, m, seed)
    if variant == "low_frequency":
        return low_frequency_mask(n, scheme.M, m, seed)
    if variant == "multilevel":
        return multilevel_mask(n, m, seed, scheme.L, scheme.a, scheme.b, scheme.full_band_radius)
    if variant == "bernoulli":
        return bernoulli_mask(scheme.M, scheme.q, seed, n=n)
    if variant == "lowest":
        return lowest_frequency_mask(n, m, dim=scheme.dim)

    shares = scheme.shares or [1.0] * len(scheme.components)
    parts = []
    for i, (component, count) in enumerate(zip(scheme.components, split_count(m, shares))):
        if count < 1:
            logger.warning(f"并集子方案 {component.tag()} 分到 0 次抽样，已跳过")
            continue
        parts.append(build_mask(component, n, count, derive_seed(seed, f"union-{i}")))
    require(bool(parts), "并集方案没有分到任何抽样")
    mask = union_masks(*parts, shares=scheme.shares)
    mask.seed = normalize_seed(seed)
    return mask


# ---------------------------------------------------------------- 测量

@dataclass(eq=False)
class MeasurementSet:
    """掩码上的观测值 y 与噪声水平 delta"""

    mask: SamplingMask
    y: np.ndarray
    delta: float = 0.0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=complex).reshape(-1)
        require(self.y.shape[0] == self.mask.size,
                f"观测数 {self.y.shape[0]} 与掩码抽样数 {self.mask.size} 不一致")
        require(self.delta >= 0, f"噪声水平须非负，实际 {self.delta}")
        require(bool(np.all(np.isfinite(self.y))), "观测值含非有限值")

    @property
    def noise_radius(self) -> float:
        """约束半径 sqrt(m)·delta"""
        return math.sqrt(self.mask.m) * self.delta

    def to_spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        """把观测散布到完整频谱（重复观测取平均），返回 (频谱, 已观测标记)"""
        counts = self.mask.multiplicity()
        total = np.zeros(counts.shape, dtype=complex)
        np.add.at(total, self.mask.positions(), self.y)
        observed = counts > 0
        spectrum = np.zeros_like(total)
        spectrum[observed] = total[observed] / counts[observed]
        return spectrum, observed


def draw_noise(size: int, radius: float, seed: int, kind: str = "gaussian") -> np.ndarray:
    """随机复噪声，缩放到 ||eta||_2 = radius"""
    require(kind in ("gaussian", "uniform"), f"未知噪声类型: {kind}")
    if radius == 0 or size == 0:
        return np.zeros(size, dtype=complex)
    rng = make_rng(seed)
    if kind == "gaussian":
        eta = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    else:
        eta = rng.uniform(-1.0, 1.0, size) + 1j * rng.uniform(-1.0, 1.0, size)
    return eta * (radius / np.linalg.norm(eta))


def measure(x, mask: SamplingMask, delta: float, seed: int, noise: str = "gaussian") -> MeasurementSet:
    """y = P_Ω A x + eta，||eta||_2 = sqrt(m)·delta"""
    x = np.asarray(x, dtype=complex)
    require(x.ndim == mask.dim, f"信号维度 {x.ndim} 与掩码维度 {mask.dim} 不一致")
    require(all(size == mask.n for size in x.shape), f"信号尺寸 {x.shape} 与掩码 N={mask.n} 不一致")
    require(delta >= 0, f"噪声水平须非负，实际 {delta}")

    y = dft(x)[mask.positions()]
    eta = draw_noise(mask.size, math.sqrt(mask.m) * delta, seed, noise)
    logger.debug(f"测量完成: {mask.size} 条观测, delta={delta}")
    return MeasurementSet(mask, y + eta, float(delta), {"noise": noise, "seed": normalize_seed(seed)})
