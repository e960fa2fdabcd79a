"""
实验报告模块

试验记录、按单元汇总，以及 CSV / SVG 输出。
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from matplotlib.figure import Figure

from utils.errors import require
from .signals import relative_error


CSV_COLUMNS = [
    "scheme", "fraction_or_m", "snr_db", "trial",
    "rel_err", "grad_rel_err", "residual", "iters", "converged",
]


@dataclass(eq=False)
class TrialReport:
    """单次试验结果"""

    scheme: str
    fraction_or_m: float
    snr_db: float
    trial: int
    seed: int
    rel_err: float
    grad_rel_err: float
    residual: float
    iters: int
    converged: bool
    recon: Optional[np.ndarray] = None

    def row(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


@dataclass(eq=False)
class ExperimentReport:
    """一次实验的全部试验记录"""

    name: str
    trials: List[TrialReport] = field(default_factory=list)
    truth: Optional[np.ndarray] = None
    exact_threshold: float = 1e-3
    meta: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """按 CSV 列组织的数据表"""
        if not self.trials:
            return pd.DataFrame(columns=CSV_COLUMNS)
        return pd.DataFrame([trial.row() for trial in self.trials], columns=CSV_COLUMNS)

    def summary(self) -> pd.DataFrame:
        """每个 (方案, 采样量, SNR) 单元的均值与精确恢复次数"""
        frame = self.to_frame()
        if frame.empty:
            return pd.DataFrame(columns=["scheme", "fraction_or_m", "snr_db", "mean_rel_err",
                                         "mean_grad_rel_err", "exact", "trials"])
        frame = frame.assign(exact=frame["rel_err"] < self.exact_threshold)
        grouped = frame.groupby(["scheme", "fraction_or_m", "snr_db"], sort=False)
        return grouped.agg(
            mean_rel_err=("rel_err", "mean"),
            mean_grad_rel_err=("grad_rel_err", "mean"),
            exact=("exact", "sum"),
            trials=("trial", "count"),
        ).reset_index()

    def cell(self, scheme: str, fraction_or_m: Optional[float] = None,
             snr_db: Optional[float] = None) -> List[TrialReport]:
        """筛选某个单元的试验"""
        return [t for t in self.trials
                if t.scheme == scheme
                and (fraction_or_m is None or t.fraction_or_m == fraction_or_m)
                and (snr_db is None or t.snr_db == snr_db)]

    def mean_curve(self, scheme: str, metric: str = "rel_err") -> pd.Series:
        """某方案沿 SNR（或采样量）的均值曲线"""
        frame = self.to_frame()
        frame = frame[frame["scheme"] == scheme]
        axis = "snr_db" if frame["snr_db"].nunique() > 1 else "fraction_or_m"
        return frame.groupby(axis)[metric].mean().sort_index()

    def schemes(self) -> List[str]:
        seen: List[str] = []
        for trial in self.trials:
            if trial.scheme not in seen:
                seen.append(trial.scheme)
        return seen

    def recompute_errors(self) -> List[float]:
        """由保存的重建信号重算相对误差"""
        require(self.truth is not None, "报告未保存真值信号")
        return [relative_error(self.truth, t.recon) for t in self.trials if t.recon is not None]


def write_csv(report: ExperimentReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report.to_frame().to_csv(path, index=False)
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """读回 CSV（浮点数无损）"""
    return pd.read_csv(path, float_precision="round_trip")


def write_svg(report: ExperimentReport, path: Union[str, Path], metric: str = "rel_err") -> Path:
    """每个方案一条均值曲线，曲线 gid 为 curve-<scheme>"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot(1, 1, 1)

    for scheme in report.schemes():
        curve = report.mean_curve(scheme, metric)
        finite = [math.isfinite(v) for v in curve.index]
        xs = curve.index[finite] if any(finite) else np.arange(len(curve))
        ys = curve.values[finite] if any(finite) else curve.values
        (line,) = axes.plot(xs, ys, marker="o", label=scheme)
        line.set_gid(f"curve-{scheme}")

    frame = report.to_frame()
    axes.set_xlabel("snr_db" if not frame.empty and frame["snr_db"].nunique() > 1 else "fraction_or_m")
    axes.set_ylabel(f"mean {metric}")
    axes.set_title(report.name)
    if report.trials:
        axes.legend()
    figure.savefig(path, format="svg")
    return path


def emit_report(report: ExperimentReport, path: Union[str, Path], fmt: str = "csv") -> Path:
    """输出报告：fmt 为 csv 或 svg"""
    require(fmt in ("csv", "svg"), f"未知报告格式: {fmt}")
    try:
        written = write_csv(report, path) if fmt == "csv" else write_svg(report, path)
    except OSError as e:
        logger.error(f"写入报告失败: {e}")
        raise
    logger.info(f"报告已写入: {written}")
    return written
