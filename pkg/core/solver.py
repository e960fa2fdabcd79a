"""
TV 最小化求解器

用分裂 Bregman 方法求解
    min ||z||_TV  s.t.  ||P_Ω A z - y||_2 <= sqrt(m)·delta
周期边界下 A*P_Ω*P_Ω A 与 D*D 都在傅里叶域对角，z 子问题逐频率闭式求解。
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from utils.errors import ConvergenceFailure, require
from .sampling import MeasurementSet
from .transforms import (
    dft, gradient_multiplier, gradient_symbol_2d, idft, tv_norm,
)


class SolverConfig(BaseModel):
    """求解器参数；配置文件中的键 lambda 通过别名映射到 lam"""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(default=1.0, gt=0, alias="lambda")
    mu: float = Field(default=10.0, gt=0)
    max_outer: int = Field(default=500, ge=1)
    max_inner: int = Field(default=2, ge=1)
    tol_rel: float = Field(default=1e-10, gt=0)
    tol_feas: float = Field(default=1e-8, gt=0)
    log_every: int = Field(default=50, ge=1)

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides) -> "SolverConfig":
        """从完整配置字典的 solver 段构造"""
        values = dict(config.get("solver", {}))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(eq=False)
class ReconResult:
    """重建结果"""

    signal: np.ndarray
    outer_iterations: int
    final_residual: float
    final_tv: float
    converged: bool
    delta: float = 0.0
    residual_history: List[float] = field(default_factory=list)
    tv_history: List[float] = field(default_factory=list)

    def metrics_line(self) -> str:
        """单行指标摘要（写入结果旁注文件）"""
        return (f"outer_iterations={self.outer_iterations} final_residual={self.final_residual!r} "
                f"final_tv={self.final_tv!r} converged={str(self.converged).lower()}")


def soft_threshold(v, t: float):
    """复数收缩：v·max(|v|-t, 0)/|v|，v=0 时为 0，相位保持"""
    require(t >= 0, f"阈值须非负，实际 {t}")
    v = np.asarray(v, dtype=complex)
    magnitude = np.abs(v)
    safe = np.where(magnitude > 0, magnitude, 1.0)
    shrunk = v * (np.maximum(magnitude - t, 0.0) / safe)
    return shrunk if shrunk.ndim else shrunk[()]


def residual(meas: MeasurementSet, z) -> float:
    """||P_Ω A z - y||_2（按抽样条数计重）"""
    z = np.asarray(z, dtype=complex)
    mask = meas.mask
    require(z.ndim == mask.dim and all(size == mask.n for size in z.shape),
            f"信号尺寸 {z.shape} 与掩码 N={mask.n}, dim={mask.dim} 不一致")
    return float(np.linalg.norm(dft(z)[mask.positions()] - meas.y))


def ensure_converged(result: ReconResult) -> ReconResult:
    """要求收敛的调用方使用：未收敛时抛出 ConvergenceFailure"""
    if not result.converged:
        raise ConvergenceFailure(
            f"求解器在 {result.outer_iterations} 次外迭代内未收敛，残差 {result.final_residual:.3e}",
            result=result,
        )
    return result


class TVSolver:
    """分裂 Bregman TV 求解器（1D/2D 通用）"""

    def __init__(self, config: Union[SolverConfig, Dict[str, Any], None] = None):
        """初始化求解器"""
        if config is None:
            config = SolverConfig()
        elif isinstance(config, dict):
            config = SolverConfig(**config)
        self.config = config

    def solve(self, meas: MeasurementSet) -> ReconResult:
        """求解约束 TV 最小化"""
        cfg = self.config
        mask = meas.mask
        require(mask.size > 0, "掩码为空，无法重建")

        n, dim = mask.n, mask.dim
        positions = mask.positions()
        shape = (n,) if dim == 1 else (n, n)
        symbol = gradient_multiplier(n) if dim == 1 else gradient_symbol_2d(n)
        counts = mask.multiplicity()
        denominator = cfg.mu * counts + cfg.lam * np.abs(symbol) ** 2
        solvable = denominator > 1e-12 * cfg.lam
        if not solvable[(0,) * dim]:
            logger.warning("零频未被测量，重建信号的均值固定为 0")

        y_norm = float(np.linalg.norm(meas.y))
        scale = float(np.max(np.abs(meas.y))) / (n ** dim)
        if scale == 0.0:
            logger.info("观测全为零，直接返回零信号")
            return ReconResult(np.zeros(shape, dtype=complex), 0, 0.0, 0.0, True, meas.delta)

        y_scaled = meas.y / scale
        radius = meas.noise_radius
        logger.info(f"开始 TV 重建: dim={dim}, N={n}, 抽样 {mask.size} 条, delta={meas.delta}")

        y_k = y_scaled.copy()
        z = np.zeros(shape, dtype=complex)
        d = np.zeros(shape, dtype=complex)
        b = np.zeros(shape, dtype=complex)
        residual_history: List[float] = []
        tv_history: List[float] = []
        converged = False
        stalled = False
        outer = 0
        res = y_norm

        for outer in range(1, cfg.max_outer + 1):
            scattered = np.zeros(shape, dtype=complex)
            np.add.at(scattered, positions, y_k)
            z_prev = z

            for _ in range(cfg.max_inner):
                rhs = cfg.mu * scattered + cfg.lam * np.conj(symbol) * dft(d - b)
                z_hat = np.where(solvable, rhs / np.where(solvable, denominator, 1.0), 0.0)
                z = idft(z_hat)
                grad_z = idft(symbol * z_hat)
                d = soft_threshold(grad_z + b, 1.0 / cfg.lam)
                b = b + grad_z - d

            sampled = dft(z)[positions]
            res = float(np.linalg.norm(sampled - y_scaled)) * scale
            tv = float(np.sum(np.abs(grad_z))) * scale
            residual_history.append(res)
            tv_history.append(tv)

            if meas.delta > 0:
                feasible = res <= radius * (1.0 + cfg.tol_feas)
            else:
                feasible = res <= cfg.tol_feas * y_norm
            if feasible:
                converged = True
                break

            # z 停滞不是终止条件
            change = np.linalg.norm(z - z_prev) / max(np.linalg.norm(z), 1e-300)
            if change < cfg.tol_rel and not stalled:
                stalled = True
                logger.debug(f"第 {outer} 次外迭代 z 的相对变化 {change:.2e}，残差 {res:.3e}，继续 Bregman 更新")

            if outer % cfg.log_every == 0:
                logger.debug(f"外迭代 {outer}: 残差={res:.3e}, TV={tv:.6g}")

            y_k = y_k + (y_scaled - sampled)

        signal = z * scale
        if converged:
            logger.info(f"TV 重建收敛: {outer} 次外迭代, 残差 {res:.3e}")
        else:
            logger.warning(f"TV 重建未收敛: {outer} 次外迭代, 残差 {res:.3e}")
        return ReconResult(
            signal=signal,
            outer_iterations=outer,
            final_residual=res,
            final_tv=tv_norm(signal),
            converged=converged,
            delta=meas.delta,
            residual_history=residual_history,
            tv_history=tv_history,
        )


def reconstruct_tv_1d(meas: MeasurementSet, cfg: Optional[SolverConfig] = None) -> ReconResult:
    """一维约束 TV 最小化"""
    require(meas.mask.dim == 1, "reconstruct_tv_1d 需要一维测量")
    return TVSolver(cfg).solve(meas)


def reconstruct_tv_2d(meas: MeasurementSet, cfg: Optional[SolverConfig] = None) -> ReconResult:
    """二维约束 TV 最小化，D = D1 + i D2"""
    require(meas.mask.dim == 2, "reconstruct_tv_2d 需要二维测量")
    return TVSolver(cfg).solve(meas)


def reconstruct(meas: MeasurementSet, cfg: Optional[SolverConfig] = None) -> ReconResult:
    """按测量维度分派"""
    return TVSolver(cfg).solve(meas)
