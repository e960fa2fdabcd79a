"""
独立凸规划参考解

小规模实例上，用通用凸优化器求同一 TV 最小化问题的最优值，用于交叉验证分裂 Bregman 求解器：
- 一维实信号：线性规划（scipy linprog / HiGHS），梯度拆分为正负部 Dz = p - q；
- 二维复信号：二阶锥规划（cvxpy 复变量），目标 sum |D1 z + i D2 z|。
"""

import warnings
from dataclasses import dataclass
from typing import Tuple

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.optimize import OptimizeWarning, linprog

from utils.errors import ToolkitError, require
from .sampling import MeasurementSet
from .transforms import tv_norm


# 参考解只在小规模上可行
MAX_ORACLE_N_1D = 64
MAX_ORACLE_N_2D = 24


@dataclass(eq=False)
class OracleResult:
    """参考解"""

    signal: np.ndarray
    tv: float
    status: str


def _averaged_samples(meas: MeasurementSet) -> Tuple[np.ndarray, np.ndarray]:
    """去重频率及其平均观测值"""
    unique, inverse = np.unique(meas.mask.indices, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    totals = np.zeros(unique.shape[0], dtype=complex)
    np.add.at(totals, inverse, meas.y)
    counts = np.bincount(inverse, minlength=unique.shape[0])
    return unique, totals / counts


def difference_matrix(n: int) -> sp.csr_matrix:
    """周期前向差分的稀疏矩阵"""
    eye = sp.identity(n, format="csr")
    shift = sp.csr_matrix((np.ones(n), (np.arange(n), (np.arange(n) + 1) % n)), shape=(n, n))
    return (eye - shift).tocsr()


def lp_tv_oracle_1d(meas: MeasurementSet) -> OracleResult:
    """实信号一维 TV 最小化的线性规划（delta = 0，等式约束）

    频率 k 与 -k 对实信号给出同一约束，因此每个 |k| 只保留一个代表行，
    实部、虚部各成一行；恒为零的虚部行（k = 0 与 k = N/2）去掉。
    结果只在掩码对共轭封闭时与复信号问题的最优值一致。
    """
    mask = meas.mask
    require(mask.dim == 1, "线性规划参考解只支持一维")
    require(meas.delta == 0, "线性规划参考解只支持 delta = 0")
    n = mask.n
    require(n <= MAX_ORACLE_N_1D, f"线性规划参考解要求 N <= {MAX_ORACLE_N_1D}，实际 {n}")

    rows = {}
    for k, value in zip(*_averaged_samples(meas)):
        k = int(k)
        rows.setdefault(abs(k), value if k >= 0 else np.conj(value))

    j = np.arange(1, n + 1)
    a_rows, b_values = [], []
    for k, value in sorted(rows.items()):
        angle = 2 * np.pi * k * j / n
        a_rows.append(np.cos(angle))
        b_values.append(value.real)
        sine = np.sin(angle)
        if np.max(np.abs(sine)) > 1e-12:
            a_rows.append(sine)
            b_values.append(value.imag)

    # 变量 [z, p, q]：min 1'p + 1'q, s.t. F z = b, D z - p + q = 0, p, q >= 0
    fourier = sp.csr_matrix(np.array(a_rows))
    zeros = sp.csr_matrix((fourier.shape[0], n))
    eye = sp.identity(n, format="csr")
    a_eq = sp.vstack([
        sp.hstack([fourier, zeros, zeros]),
        sp.hstack([difference_matrix(n), -eye, eye]),
    ]).tocsr()
    b_eq = np.concatenate([np.array(b_values), np.zeros(n)])
    cost = np.concatenate([np.zeros(n), np.ones(2 * n)])
    bounds = [(None, None)] * n + [(0, None)] * (2 * n)

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", category=OptimizeWarning)
        res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")

    if not res.success:
        logger.error(f"线性规划参考解失败: {res.message}")
        raise ToolkitError(f"线性规划求解失败: {res.message}")

    signal = res.x[:n].astype(complex)
    logger.debug(f"线性规划参考解: N={n}, 约束行 {fourier.shape[0]}, 最优值 {res.fun:.10g}")
    return OracleResult(signal, float(res.fun), res.message)


def dft_rows_2d(indices: np.ndarray, n: int) -> np.ndarray:
    """稠密二维 DFT 行，列按行优先展平的 (j1, j2)"""
    j = np.arange(1, n + 1)
    j1, j2 = np.meshgrid(j, j, indexing="ij")
    j1, j2 = j1.ravel(), j2.ravel()
    phase = np.outer(indices[:, 0], j1) + np.outer(indices[:, 1], j2)
    return np.exp(2j * np.pi * phase / n)


def socp_tv_oracle_2d(meas: MeasurementSet) -> OracleResult:
    """二维复信号 TV 最小化的二阶锥规划

    delta = 0 时对去重频率施加等式约束，否则施加 ||P_Ω A z - y||_2 <= sqrt(m)·delta。
    """
    mask = meas.mask
    require(mask.dim == 2, "二阶锥参考解只支持二维")
    n = mask.n
    require(n <= MAX_ORACLE_N_2D, f"二阶锥参考解要求 N <= {MAX_ORACLE_N_2D}，实际 {n}")

    # 行优先展平：D1 沿 axis 0 即跨行差分，D2 沿 axis 1
    base = difference_matrix(n)
    eye = sp.identity(n, format="csr")
    d1 = sp.kron(base, eye, format="csr")
    d2 = sp.kron(eye, base, format="csr")

    z = cp.Variable(n * n, complex=True)
    objective = cp.Minimize(cp.sum(cp.abs(d1 @ z + 1j * (d2 @ z))))
    if meas.delta == 0:
        unique, values = _averaged_samples(meas)
        constraints = [dft_rows_2d(unique, n) @ z == values]
    else:
        constraints = [cp.norm(dft_rows_2d(mask.indices, n) @ z - meas.y, 2) <= meas.noise_radius]

    problem = cp.Problem(objective, constraints)
    try:
        problem.solve()
    except cp.SolverError as e:
        logger.error(f"二阶锥参考解失败: {e}")
        raise ToolkitError(f"二阶锥规划求解失败: {e}") from e

    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise ToolkitError(f"二阶锥规划状态异常: {problem.status}")

    signal = np.asarray(z.value).reshape(n, n)
    logger.debug(f"二阶锥参考解: N={n}, 状态 {problem.status}, 最优值 {problem.value:.10g}")
    return OracleResult(signal, tv_norm(signal), problem.status)
