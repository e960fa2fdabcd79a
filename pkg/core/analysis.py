"""
证书与诊断模块

最小间隔、平方 Fejér 核及其系数、插值矩阵 L 与 L~、对偶证书的构造与验证、
Fourier-Haar 相干性、（弱）RIP 枚举检验、恢复充分条件检查以及 Poincaré 比值。

核的自变量以“周期”为单位：离散量一律在 t = (整数差)/N 处求值。
"""

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from utils.errors import require
from .sampling import SamplingMask
from .transforms import (
    as_signal, dft_1d, frequencies as signed_frequencies, gradient, haar, haar_basis_1d,
    idft_1d, is_power_of_two, tv_norm,
)


# 平方 Fejér 核路线的阈值常数
L_NORM_BOUND = 1.25
L_INV_NORM_BOUND = 4.0 / 3.0
COLUMN_BOUND = 6.0
SINGLE_COLUMN_BOUND = 5.5
WEIGHT_CONSTANT = 1.0
COEFFICIENT_CONSTANT = 1.568
INTERPOLATION_TOL = 1e-8
NULL_TV_RTOL = 1e-12

# RIP 枚举的规模上限
RIP_MAX_COLUMNS = 24
RIP_MAX_ORDER = 4
WEAK_RIP_MAX_SUPPORTS = 20000

# 接近整数时改用有限三角和求核
_NEAR_INTEGER = 1e-3


# ---------------------------------------------------------------- 支撑集

@dataclass(eq=False)
class SupportSet:
    """梯度支撑 {t_1 < ... < t_s} ⊂ {1, ..., N}"""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        require(self.indices.size >= 1, "支撑集不能为空")
        require(bool(np.all(np.diff(self.indices) > 0)), "支撑集须严格递增")
        require(int(self.indices[0]) >= 1 and int(self.indices[-1]) <= self.n,
                f"支撑索引须位于 1..{self.n}")

    @property
    def s(self) -> int:
        return int(self.indices.size)

    @property
    def positions(self) -> np.ndarray:
        """0 起始的存储位置"""
        return self.indices - 1

    @classmethod
    def from_signal(cls, x, tol: float = 1e-10) -> "SupportSet":
        """一维信号梯度非零的位置（1 起始）"""
        grad = gradient(as_signal(x))
        require(grad.ndim == 1, "只有一维信号有离散支撑集")
        scale = max(float(np.max(np.abs(grad))), 1.0)
        return cls(np.flatnonzero(np.abs(grad) > tol * scale) + 1, grad.shape[0])

    @classmethod
    def equispaced(cls, n: int, s: int, spacing: int, start: int = 1) -> "SupportSet":
        """等间距支撑 start, start+spacing, ..."""
        require(s * spacing <= n, f"{s} 个间距 {spacing} 的点放不进 N={n}")
        return cls(start + spacing * np.arange(s), n)


def min_separation(support: SupportSet) -> float:
    """最小环绕间隔 min_j |t_j - t_{j-1}| / N，t_0 = t_s - N"""
    t = support.indices
    previous = np.concatenate([[t[-1] - support.n], t[:-1]])
    return float(np.min(t - previous)) / support.n


# ---------------------------------------------------------------- Fejér 核

@dataclass(eq=False)
class FejerCoefficients:
    """g_M(j)，j = -2M, ..., 2M"""

    M: int
    g: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-2 * self.M, 2 * self.M + 1)

    def at(self, j) -> np.ndarray:
        """在任意整数频率处取值（带外为 0）"""
        j = np.asarray(j, dtype=np.int64)
        inside = np.abs(j) <= 2 * self.M
        values = np.zeros(j.shape)
        values[inside] = self.g[j[inside] + 2 * self.M]
        return values


def fejer_coeffs(M: int) -> FejerCoefficients:
    """g_M(j) = (1/M) sum_k (1 - |k/M|)(1 - |j/M - k/M|)，k 取使两因子非负的范围"""
    require(M >= 1, f"M 须为正，实际 {M}")
    j = np.arange(-2 * M, 2 * M + 1)[:, None]
    k = np.arange(-M, M + 1)[None, :]
    terms = (1.0 - np.abs(k) / M) * np.clip(1.0 - np.abs(j - k) / M, 0.0, None)
    return FejerCoefficients(M, terms.sum(axis=1) / M)


def kernel_series(t, M: int, derivative: int = 0, frequencies: Optional[np.ndarray] = None,
                  coeffs: Optional[FejerCoefficients] = None) -> np.ndarray:
    """(1/M) sum_l g_M(l) (-2 pi i l)^r exp(-2 pi i t l)，l 取 frequencies（默认整个频带，可含重复）"""
    coeffs = coeffs or fejer_coeffs(M)
    l = coeffs.frequencies if frequencies is None else np.asarray(frequencies, dtype=np.int64)
    weights = coeffs.at(l) * (-2j * np.pi * l) ** derivative / M
    t = np.asarray(t, dtype=float)
    return np.exp(-2j * np.pi * t[..., None] * l) @ weights


def fejer_kernel(t, M: int, derivative: int = 0) -> np.ndarray:
    """K_M(t) = (sin(pi M t) / (M sin(pi t)))^4 及其一、二阶导数

    闭式求值，整数附近（可去奇点）改用有限三角和。
    """
    require(M >= 1, f"M 须为正，实际 {M}")
    require(derivative in (0, 1, 2), f"只支持 0-2 阶导数，实际 {derivative}")
    t = np.asarray(t, dtype=float)
    shape = t.shape
    t = t.reshape(-1)
    w = np.sin(np.pi * t)
    near = np.abs(w) < _NEAR_INTEGER
    safe_w = np.where(near, 1.0, w)

    u = np.sin(np.pi * M * t)
    du = np.pi * M * np.cos(np.pi * M * t)
    dw = np.pi * np.cos(np.pi * t)
    f = u / (M * safe_w)
    if derivative == 0:
        closed = f ** 4
    else:
        df = (du * safe_w - u * dw) / (M * safe_w ** 2)
        if derivative == 1:
            closed = 4 * f ** 3 * df
        else:
            d2f = (np.pi ** 2 * (1 - M ** 2) * u * safe_w ** 2
                   - 2 * dw * (du * safe_w - u * dw)) / (M * safe_w ** 3)
            closed = 12 * f ** 2 * df ** 2 + 4 * f ** 3 * d2f

    result = np.array(closed, dtype=float)
    if np.any(near):
        result[near] = kernel_series(t[near], M, derivative).real
    result = result.reshape(shape)
    return result if result.ndim else float(result)


def fejer_second_derivative_at_zero(M: int) -> float:
    """K_M''(0) = -4 pi^2 (M^2 - 1) / 3"""
    return -4.0 * np.pi ** 2 * (M ** 2 - 1) / 3.0


# ---------------------------------------------------------------- 插值矩阵

def _differences(support: SupportSet) -> np.ndarray:
    t = support.indices.astype(float)
    return (t[:, None] - t[None, :]) / support.n


def build_L(support: SupportSet, M: int) -> np.ndarray:
    """L_{jk} = K_M((t_j - t_k)/N)"""
    if min_separation(support) < 1.0 / M:
        logger.warning(f"支撑最小间隔 {min_separation(support):.4g} 小于 1/M = {1.0 / M:.4g}")
    return fejer_kernel(_differences(support), M)


def dft_rows_1d(frequencies, n: int, columns=None) -> np.ndarray:
    """稠密 DFT 行 exp(2 pi i k j / N)，列为 1 起始的 j（默认全部）"""
    j = np.arange(1, n + 1) if columns is None else np.asarray(columns)
    return np.exp(2j * np.pi * np.outer(np.asarray(frequencies), j) / n)


def l_factorization_error(support: SupportSet, M: int) -> float:
    """||L - (1/M) P_Δ A* V A P_Δ||_max，V = diag(g_M(k))（|k| <= 2M）"""
    coeffs = fejer_coeffs(M)
    rows = dft_rows_1d(coeffs.frequencies, support.n, support.indices)
    factored = rows.conj().T @ (coeffs.g[:, None] * rows) / M
    return float(np.max(np.abs(build_L(support, M) - factored)))


@dataclass(eq=False)
class LTildeReport:
    """L~ 及其算子范数"""

    matrix: np.ndarray
    norm: float
    inverse_norm: float
    invertible: bool
    condition: float


def _norm_report(matrix: np.ndarray) -> LTildeReport:
    singular = np.linalg.svd(matrix, compute_uv=False)
    s_max, s_min = float(singular[0]), float(singular[-1])
    invertible = s_min > 1e-12 * max(s_max, 1.0)
    inverse_norm = 1.0 / s_min if invertible else math.inf
    condition = s_max / s_min if invertible else math.inf
    return LTildeReport(matrix, s_max, inverse_norm, invertible, condition)


def _mask_rate(mask: SamplingMask, q: Optional[float]) -> float:
    if q is not None:
        return q
    return mask.scheme.q if mask.scheme.q is not None else 1.0


def build_L_tilde(support: SupportSet, M: int, mask: SamplingMask,
                  q: Optional[float] = None) -> LTildeReport:
    """L~_{jk} = (1/(qM)) sum_{l in Ω} g_M(l) exp(-2 pi i l (t_j - t_k)/N)

    q = 1 且掩码为整个频带时 L~ = L。奇异时在报告中标记，不抛出。
    """
    require(mask.dim == 1 and mask.n == support.n, "掩码须为一维且与支撑集同 N")
    require(mask.within_band(M), f"掩码须位于频带 [-{2 * M}, {2 * M}] 内")
    rate = _mask_rate(mask, q)
    matrix = kernel_series(_differences(support), M, frequencies=mask.indices) / rate
    report = _norm_report(matrix)
    if not report.invertible:
        logger.warning("L~ 奇异")
    return report


# ---------------------------------------------------------------- 对偶证书

@dataclass(eq=False)
class DualCertificate:
    """Q(u) = sum_k alpha_k K~(u - tau_k) + beta_k K~'(u - tau_k)，tau_k = t_k / N"""

    support: SupportSet
    signs: np.ndarray
    M: int
    mask: SamplingMask
    q: float
    alpha: np.ndarray
    beta: np.ndarray
    solvable: bool
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def evaluate(self, u, derivative: int = 0) -> np.ndarray:
        """直接按核求和计算 Q（或 Q'）"""
        tau = self.support.indices / self.support.n
        shifts = np.asarray(u, dtype=float)[..., None] - tau
        coeffs = fejer_coeffs(self.M)
        k0 = kernel_series(shifts, self.M, derivative, self.mask.indices, coeffs)
        k1 = kernel_series(shifts, self.M, derivative + 1, self.mask.indices, coeffs)
        return k0 @ self.alpha + k1 @ self.beta

    def grid_values(self) -> np.ndarray:
        """Q(j/N)，j = 1..N"""
        return self.evaluate(np.arange(1, self.support.n + 1) / self.support.n)


def _check_signs(signs, s: int) -> np.ndarray:
    signs = np.asarray(signs, dtype=complex).reshape(-1)
    require(signs.size == s, f"符号个数 {signs.size} 与支撑大小 {s} 不一致")
    require(bool(np.all(np.abs(np.abs(signs) - 1.0) <= 1e-12)), "符号须为单位模复数")
    return signs


def dual_certificate(support: SupportSet, signs, M: int, mask: SamplingMask,
                     q: Optional[float] = None) -> DualCertificate:
    """求解 2s×2s 插值系统 {Q(tau_k) = sign_k, Q'(tau_k) = 0}，并在全部格点上检验"""
    signs = _check_signs(signs, support.s)
    require(mask.dim == 1 and mask.n == support.n, "掩码须为一维且与支撑集同 N")
    require(mask.within_band(M), f"掩码须位于频带 [-{2 * M}, {2 * M}] 内")
    separation = min_separation(support)
    if separation < 1.0 / M:
        logger.warning(f"支撑最小间隔 {separation:.4g} 小于 1/M，证书可能不存在")

    rate = _mask_rate(mask, q)
    coeffs = fejer_coeffs(M)
    diffs = _differences(support)
    # beta 按 sqrt|K''(0)| 缩放以改善条件数
    c = math.sqrt(abs(fejer_second_derivative_at_zero(M))) if M > 1 else 1.0
    k0, k1, k2 = (kernel_series(diffs, M, r, mask.indices, coeffs) for r in range(3))
    system = np.block([[k0, k1 / c], [k1 / c, k2 / c ** 2]])
    rhs = np.concatenate([signs, np.zeros(support.s, dtype=complex)])

    s = support.s
    condition = float(np.linalg.cond(system))
    try:
        if not np.isfinite(condition) or condition > 1e14:
            raise np.linalg.LinAlgError("condition number too large")
        solution = np.linalg.solve(system, rhs)
        alpha, beta = solution[:s], solution[s:] / c
        solvable = True
    except np.linalg.LinAlgError:
        logger.warning(f"插值系统奇异，条件数 {condition:.3e}")
        alpha = np.full(s, np.nan, dtype=complex)
        beta = np.full(s, np.nan, dtype=complex)
        solvable = False

    cert = DualCertificate(support, signs, M, mask, rate, alpha, beta, solvable,
                           {"condition": condition, "min_separation": separation})
    if solvable:
        _fill_diagnostics(cert)
    return cert


def stability_bound(M: int, n: int) -> float:
    """max{1 - 0.92 (M^2 - 1)/N^2, 0.99993}"""
    return max(1.0 - 0.92 * (M ** 2 - 1) / n ** 2, 0.99993)


def _fill_diagnostics(cert: DualCertificate):
    n, M, s = cert.support.n, cert.M, cert.support.s
    values = cert.grid_values()
    on_support = cert.support.positions
    off_support = np.setdiff1d(np.arange(n), on_support)
    derivative = cert.evaluate(cert.support.indices / n, derivative=1)

    k2 = abs(fejer_second_derivative_at_zero(M))
    coefficient_norm = math.sqrt(float(np.sum(np.abs(cert.alpha) ** 2) + k2 * np.sum(np.abs(cert.beta) ** 2)))
    cert.diagnostics.update({
        "interpolation_error": float(np.max(np.abs(values[on_support] - cert.signs))),
        "max_derivative": float(np.max(np.abs(derivative))),
        "max_off_support": float(np.max(np.abs(values[off_support]))) if off_support.size else 0.0,
        "stability_bound": stability_bound(M, n),
        "coefficient_norm": coefficient_norm,
        "coefficient_bound": 2.0 * math.sqrt(s) / cert.q * COEFFICIENT_CONSTANT,
    })
    logger.debug(f"证书诊断: {cert.diagnostics}")


@dataclass(eq=False)
class CertificateWeights:
    """rho = A* P_Ω w 的权重表示"""

    w: np.ndarray
    rho: np.ndarray
    reconstruction_error: float
    norm: float
    bound_ratio: float


def certificate_weights(cert: DualCertificate) -> CertificateWeights:
    """w_l = (g_M(l)/M)(sum_k alpha_k e^{2 pi i t_k l/N} - 2 pi i l sum_k beta_k e^{2 pi i t_k l/N})"""
    require(cert.solvable, "证书插值系统不可解，无法计算权重")
    n = cert.support.n
    l = cert.mask.indices
    phases = np.exp(2j * np.pi * np.outer(l, cert.support.indices) / n)
    g = fejer_coeffs(cert.M).at(l)
    w = (g / cert.M) * (phases @ cert.alpha - 2j * np.pi * l * (phases @ cert.beta))

    spectrum = np.zeros(n, dtype=complex)
    np.add.at(spectrum, cert.mask.positions(), w)
    rho = n * idft_1d(spectrum)

    norm = float(np.linalg.norm(w))
    m = max(cert.mask.m, 1)
    return CertificateWeights(
        w=w,
        rho=rho,
        reconstruction_error=float(np.max(np.abs(rho - cert.grid_values()))),
        norm=norm,
        bound_ratio=norm * math.sqrt(m) / math.sqrt(cert.support.s),
    )


# ---------------------------------------------------------------- 条件报告

@dataclass
class ConditionEntry:
    value: float
    threshold: float
    passed: bool


@dataclass
class ConditionReport:
    """条件标签 -> (数值, 阈值, 是否通过)"""

    entries: Dict[str, ConditionEntry] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add(self, label: str, value: float, threshold: float):
        self.entries[label] = ConditionEntry(float(value), float(threshold), bool(value <= threshold))

    @property
    def all_passed(self) -> bool:
        return all(entry.passed for entry in self.entries.values())

    def passed(self, *labels: str) -> bool:
        return all(self.entries[label].passed for label in labels)

    def lines(self) -> List[str]:
        """每个条件一行：label value threshold pass"""
        return [f"{label} {entry.value!r} {entry.threshold!r} {'pass' if entry.passed else 'fail'}"
                for label, entry in self.entries.items()]


def _column_bounds(support: SupportSet, M: int, mask: SamplingMask, rate: float) -> Tuple[float, float]:
    """L~ 在支撑外的列：max_j ||(L~_{t_k, j})_k||_2 以及单列 |L~_{jj}|"""
    n = support.n
    off = np.setdiff1d(np.arange(1, n + 1), support.indices)
    diffs = (support.indices[:, None] - off[None, :]) / n
    columns = kernel_series(diffs, M, frequencies=mask.indices) / rate
    column_bound = float(np.max(np.linalg.norm(columns, axis=0))) if off.size else 0.0
    single = float(abs(kernel_series(np.array(0.0), M, frequencies=mask.indices) / rate))
    return column_bound, single


def fejer_conditions(cert: DualCertificate) -> ConditionReport:
    """平方 Fejér 核路线的充分条件"""
    report = ConditionReport()
    lt = build_L_tilde(cert.support, cert.M, cert.mask, cert.q)
    report.add("lt_inverse_norm", lt.inverse_norm, L_INV_NORM_BOUND)
    report.add("lt_norm", lt.norm, L_NORM_BOUND)
    column_bound, single = _column_bounds(cert.support, cert.M, cert.mask, cert.q)
    report.add("column_bound", column_bound, COLUMN_BOUND)
    report.add("single_column", single, SINGLE_COLUMN_BOUND)
    if not cert.solvable:
        report.notes.append("插值系统奇异，证书相关条件未计算")
        return report
    report.add("off_support_sup", cert.diagnostics["max_off_support"], cert.diagnostics["stability_bound"])
    report.add("interpolation", cert.diagnostics["interpolation_error"], INTERPOLATION_TOL)
    weights = certificate_weights(cert)
    report.add("weight_norm", weights.bound_ratio, WEIGHT_CONSTANT)
    return report


def candes_plan_conditions(mask: SamplingMask, support: SupportSet, r: int = 2,
                           certificate: Optional[DualCertificate] = None,
                           rip_delta: float = 0.25) -> ConditionReport:
    """U = A、Γ = 去重掩码时的恢复充分条件

    (i)  ||(U*_{Γ,Λ} U_{Γ,Λ})^{-1}|| <= 2，U_{Γ,Λ} = m^{-1/2} P_Γ A P_Λ
    (ii) (1/m) max_{i not in Λ} ||P_Λ A* P_Γ A e_i||_2 <= 1
    (iii)-(v) 仅在提供证书时报告；(vi) 弱 RIP 只在规模允许枚举时计算。
    m 取声明的抽样次数 mask.m（有放回采样时大于 |Γ|）。
    """
    require(mask.dim == 1 and mask.n == support.n, "掩码须为一维且与支撑集同 N")
    n = support.n
    gamma = mask.unique()
    m = mask.m
    rows = dft_rows_1d(gamma, n)
    lam = support.positions
    report = ConditionReport()

    restricted = rows[:, lam] / math.sqrt(m)
    gram = restricted.conj().T @ restricted
    eigenvalues = np.linalg.eigvalsh(gram)
    report.add("(i)", 1.0 / eigenvalues[0] if eigenvalues[0] > 1e-14 else math.inf, 2.0)

    cross = rows[:, lam].conj().T @ rows / m
    outside = np.setdiff1d(np.arange(n), lam)
    report.add("(ii)", float(np.max(np.linalg.norm(cross[:, outside], axis=0))) if outside.size else 0.0, 1.0)

    if certificate is not None and certificate.solvable:
        values = certificate.grid_values()
        report.add("(iii)", float(np.linalg.norm(values[lam] - certificate.signs)), INTERPOLATION_TOL)
        report.add("(iv)", certificate.diagnostics["max_off_support"], certificate.diagnostics["stability_bound"])
        report.add("(v)", certificate_weights(certificate).bound_ratio, WEIGHT_CONSTANT)
    else:
        report.notes.append("(iii)-(v) 需要对偶证书，未计算")

    supports = math.comb(n - support.s, r)
    if n > RIP_MAX_COLUMNS or r > RIP_MAX_ORDER or supports > WEAK_RIP_MAX_SUPPORTS:
        report.notes.append(f"(vi) 弱 RIP 枚举规模过大（N={n}, r={r}, 支撑数 {supports}），已跳过")
        logger.warning(report.notes[-1])
    else:
        rip = rip_check(rows / math.sqrt(m), r, rip_delta, base_support=lam)
        report.add("(vi)", rip.isometry_constant, rip_delta)
    return report


# ---------------------------------------------------------------- 相干性与 RIP

def coherence(U) -> float:
    """mu(U) = max |U_ij|^2"""
    return float(np.max(np.abs(np.asarray(U)) ** 2))


@dataclass(eq=False)
class CoherenceProfile:
    """每个频率 k 的 max_j |<psi_k, H_j>| 与理论上界"""

    frequencies: np.ndarray
    values: np.ndarray
    bounds: np.ndarray

    @property
    def within_bounds(self) -> bool:
        return bool(np.all(self.values <= self.bounds + 1e-12))


def fourier_haar_coherence(n: int) -> CoherenceProfile:
    """<psi_k, H_j> = N^{-1/2} (A H_j)_k，psi_k 为酉傅里叶行"""
    require(is_power_of_two(n), f"相干性计算要求 N = 2^J，实际 N = {n}")
    basis = haar_basis_1d(n)
    products = np.stack([dft_1d(basis[:, j]) for j in range(n)], axis=1) / math.sqrt(n)
    by_position = np.max(np.abs(products), axis=1)
    freqs = signed_frequencies(n)
    order = np.argsort(freqs)
    freqs = freqs[order]
    values = by_position[order]
    with np.errstate(divide="ignore"):
        bounds = np.where(freqs == 0, 1.0, 3.0 * math.sqrt(2 * math.pi) / np.sqrt(np.abs(freqs)))
    return CoherenceProfile(freqs, values, bounds)


def kappa_bound(n: int) -> Tuple[float, float]:
    """(||kappa||_2^2, 36(1 + pi log N))"""
    profile = fourier_haar_coherence(n)
    return float(np.sum(profile.values ** 2)), 36.0 * (1.0 + math.pi * math.log(n))


@dataclass(eq=False)
class RIPReport:
    """穷举支撑的等距常数"""

    passed: bool
    isometry_constant: float
    min_eigenvalue: float
    max_eigenvalue: float
    worst_ratio: float
    worst_support: Tuple[int, ...]
    supports_checked: int


def rip_check(U, s: int, delta: float, base_support: Optional[Sequence[int]] = None) -> RIPReport:
    """穷举所有 s 列支撑（给定 base_support 时为 base ∪ Γ，Γ 取自其补集）"""
    U = np.asarray(U, dtype=complex)
    columns = U.shape[1]
    require(columns <= RIP_MAX_COLUMNS, f"RIP 枚举要求列数 <= {RIP_MAX_COLUMNS}，实际 {columns}")
    require(1 <= s <= RIP_MAX_ORDER, f"RIP 阶数须位于 1..{RIP_MAX_ORDER}，实际 {s}")
    require(0 <= delta, f"delta 须非负，实际 {delta}")

    base = tuple(int(i) for i in (base_support if base_support is not None else ()))
    pool = [i for i in range(columns) if i not in base]
    lowest, highest = math.inf, -math.inf
    worst_constant, worst_ratio, worst_support = -1.0, 1.0, base
    checked = 0

    for extra in combinations(pool, s):
        support = tuple(sorted(base + extra))
        sub = U[:, support]
        eigenvalues = np.linalg.eigvalsh(sub.conj().T @ sub)
        low, high = float(eigenvalues[0]), float(eigenvalues[-1])
        lowest, highest = min(lowest, low), max(highest, high)
        constant = max(1.0 - low, high - 1.0)
        ratio = high / low if low > 1e-12 else math.inf
        if constant > worst_constant:
            worst_constant, worst_support = constant, support
        worst_ratio = max(worst_ratio, ratio)
        checked += 1

    return RIPReport(
        passed=worst_constant <= delta,
        isometry_constant=worst_constant,
        min_eigenvalue=lowest,
        max_eigenvalue=highest,
        worst_ratio=worst_ratio,
        worst_support=worst_support,
        supports_checked=checked,
    )


# ---------------------------------------------------------------- Poincaré 与 Haar 衰减

def _centered(x) -> Tuple[np.ndarray, np.ndarray, float]:
    """(信号, 去均值信号, TV)；TV 不超过 ||x||_2 的舍入量级时视为常数信号，TV 记为 0"""
    x = as_signal(x)
    z = x - x.mean()
    tv = tv_norm(z)
    if tv <= NULL_TV_RTOL * float(np.linalg.norm(x)):
        tv = 0.0
    return x, z, tv


def poincare_gap(x) -> float:
    """去均值后 ||z||_2 / (sqrt(N) ||z||_TV)（一维）或 ||z||_2 / ||z||_TV（二维）；常数信号记为 0"""
    x, z, tv = _centered(x)
    if tv == 0.0:
        return 0.0
    norm = float(np.linalg.norm(z))
    if x.ndim == 1:
        return norm / (math.sqrt(x.shape[0]) * tv)
    return norm / tv


def haar_decay_constant(x) -> float:
    """max_j h_(j) j^{3/2} / (sqrt(N) ||x||_TV)（一维）或 max_j h_(j) j / ||x||_TV（二维）

    h_(j) 为去均值信号的 Haar 系数幅值降序排列。
    """
    x, z, tv = _centered(x)
    if tv == 0.0:
        return 0.0
    magnitudes = np.sort(np.abs(haar(z)).ravel())[::-1]
    j = np.arange(1, magnitudes.size + 1)
    if x.ndim == 1:
        return float(np.max(magnitudes * j ** 1.5) / (math.sqrt(x.shape[0]) * tv))
    return float(np.max(magnitudes * j) / tv)
