"""
数值实验编排

按 (采样方案, 采样量, SNR) 单元与试验序号展开试验，joblib 线程后端并行执行，结果按单元与试验序号排序。
每次试验的随机流由 (主种子, 用途标签, 试验序号) 派生，结果与并行度无关。
"""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from utils.errors import InputValidationError
from utils.rng import derive_seed
from .report_builder import ExperimentReport, TrialReport
from .sampling import MeasurementSet, SamplingScheme, build_mask, draw_noise, measure
from .signals import (
    SignalSpec, gen_piecewise_signal, gradient_relative_error, perturb_to_snr, relative_error,
)
from .solver import SolverConfig, TVSolver
from .transforms import dft


NoiseMode = Literal["none", "perturb", "measurement"]

TABLE1_FRACTIONS = [0.039, 0.07, 0.09, 0.10]
STABILITY_SNR_GRID = [14.0, 17.0, 20.0, 23.0, 26.0, 29.0, 32.0, 35.0]
ROBUSTNESS_SNR_GRID = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, math.inf]


class ExperimentSpec(BaseModel):
    """实验描述

    noise_mode：none 为精确测量；perturb 在测量前按 SNR 扰动信号（delta = 0）；
    measurement 在测量上加噪，噪声相对 ||P_Ω A x||_2 取 SNR，delta = ||e||_2 / sqrt(m)。
    """

    name: str
    signal: SignalSpec
    schemes: List[SamplingScheme]
    fractions: List[float] = Field(default_factory=list)
    counts: List[int] = Field(default_factory=list)
    snr_grid: List[float] = Field(default_factory=lambda: [math.inf])
    noise_mode: NoiseMode = "none"
    noise: Literal["gaussian", "uniform"] = "gaussian"
    trials: int = Field(default=5, ge=1)
    master_seed: int = 2024
    solver: SolverConfig = Field(default_factory=SolverConfig)
    keep_signals: bool = True

    @model_validator(mode="after")
    def _check_grid(self):
        if bool(self.fractions) == bool(self.counts):
            raise ValueError("fractions 与 counts 须且只能给出一个")
        if any(not 0 < f <= 1 for f in self.fractions):
            raise ValueError("采样比例须位于 (0, 1]")
        if any(c < 1 for c in self.counts):
            raise ValueError("采样次数须为正")
        if not self.schemes:
            raise ValueError("至少需要一个采样方案")
        return self

    def cells(self) -> List[Tuple[SamplingScheme, float, int, float]]:
        """展开 (方案, 比例或次数, m, SNR)"""
        total = self.signal.n ** self.signal.dim
        sizes = ([(f, int(round(f * total))) for f in self.fractions]
                 or [(float(c), c) for c in self.counts])
        return [(scheme, label, max(m, 1), snr)
                for scheme in self.schemes for label, m in sizes for snr in self.snr_grid]


def _mask_draws(scheme: SamplingScheme, m: int) -> int:
    """多层方案的低频全采样块计入总量"""
    if scheme.variant == "multilevel":
        block = (2 * scheme.full_band_radius + 1) ** 2
        return max(m - block, 1)
    return m


class ExperimentRunner:
    """实验运行器"""

    def __init__(self, config: Optional[Dict[str, Any]] = None, threads: Optional[int] = None):
        """初始化实验运行器"""
        self.config = config or {}
        experiments = self.config.get("experiments", {})
        self.master_seed = int(experiments.get("master_seed", 2024))
        self.trials = int(experiments.get("trials", 5))
        self.exact_threshold = float(experiments.get("exact_threshold", 1e-3))
        self.solver_config = SolverConfig.from_config(
            self.config, max_outer=experiments.get("max_outer"))
        self.threads = threads or self.config.get("runtime", {}).get("threads") or 1
        logger.info(f"实验运行器已初始化（线程数 {self.threads}）")

    # ------------------------------------------------------------ 通用执行

    def run(self, spec: ExperimentSpec) -> ExperimentReport:
        """执行实验并按 (单元, 试验) 排序汇总"""
        truth, _ = gen_piecewise_signal(spec.signal, derive_seed(spec.master_seed, "signal"))
        cells = spec.cells()
        jobs = [(index, cell, trial) for index, cell in enumerate(cells) for trial in range(spec.trials)]
        workers = max(1, min(self.threads, len(jobs)))
        logger.info(f"开始实验 {spec.name}: {len(cells)} 个单元 × {spec.trials} 次试验，{workers} 个线程")

        solver = TVSolver(spec.solver)
        results = Parallel(n_jobs=workers, prefer="threads")(
            delayed(self._run_trial)(spec, truth, solver, *job) for job in jobs)
        results.sort(key=lambda item: (item[0], item[1].trial))

        report = ExperimentReport(
            name=spec.name,
            trials=[trial for _, trial in results],
            truth=truth,
            exact_threshold=self.exact_threshold,
            meta={"master_seed": spec.master_seed, "signal": spec.signal.model_dump()},
        )
        logger.success(f"实验 {spec.name} 完成，共 {len(report.trials)} 条试验记录")
        return report

    def _run_trial(self, spec: ExperimentSpec, truth: np.ndarray, solver: TVSolver, index: int,
                   cell: Tuple[SamplingScheme, float, int, float], trial: int) -> Tuple[int, TrialReport]:
        scheme, label, m, snr = cell
        mask_seed = derive_seed(spec.master_seed, "mask", trial)
        noise_seed = derive_seed(spec.master_seed, "noise", trial)
        mask = build_mask(scheme, spec.signal.n, _mask_draws(scheme, m), mask_seed)

        measured = truth
        if spec.noise_mode == "perturb" and math.isfinite(snr):
            measured = perturb_to_snr(truth, snr, noise_seed, spec.noise)
        meas = measure(measured, mask, 0.0, noise_seed)

        if spec.noise_mode == "measurement" and math.isfinite(snr):
            clean = dft(truth)[mask.positions()]
            radius = float(np.linalg.norm(clean)) * 10.0 ** (-snr / 10.0)
            noisy = meas.y + draw_noise(mask.size, radius, noise_seed, spec.noise)
            delta = radius / math.sqrt(mask.m)
            meas = MeasurementSet(mask, noisy, delta, meas.meta)

        result = solver.solve(meas)
        report = TrialReport(
            scheme=scheme.tag(),
            fraction_or_m=label,
            snr_db=snr,
            trial=trial,
            seed=mask_seed,
            rel_err=relative_error(truth, result.signal),
            grad_rel_err=gradient_relative_error(truth, result.signal),
            residual=result.final_residual,
            iters=result.outer_iterations,
            converged=result.converged,
            recon=result.signal if spec.keep_signals else None,
        )
        logger.debug(f"{spec.name} [{report.scheme}, {label}, snr={snr}] 试验 {trial}: 相对误差 {report.rel_err:.3e}")
        return index, report

    def _spec(self, **values) -> ExperimentSpec:
        values.setdefault("trials", self.trials)
        values.setdefault("master_seed", self.master_seed)
        values.setdefault("solver", self.solver_config)
        return ExperimentSpec(**values)

    # ------------------------------------------------------------ 预置实验

    def run_table1(self, signal: Optional[SignalSpec] = None,
                   fractions: Optional[List[float]] = None, trials: int = 5) -> ExperimentReport:
        """粗信号、均匀采样（并入 0）下各采样比例的相对误差"""
        return self.run(self._spec(
            name="table1",
            signal=signal or SignalSpec.preset("coarse"),
            schemes=[SamplingScheme(variant="uniform")],
            fractions=fractions or TABLE1_FRACTIONS,
            trials=trials,
        ))

    def run_stability_comparison(self, signal: Optional[SignalSpec] = None,
                                 snr_grid: Optional[List[float]] = None,
                                 trials: Optional[int] = None,
                                 fraction: float = 0.15) -> ExperimentReport:
        """信号扰动下均匀采样与“均匀 + 幂律”各半的比较（delta = 0）"""
        schemes = [
            SamplingScheme(variant="uniform"),
            SamplingScheme(variant="union", components=[
                SamplingScheme(variant="uniform"), SamplingScheme(variant="power_law_1d")]),
        ]
        return self.run(self._spec(
            name="stability",
            signal=signal or SignalSpec.preset("coarse"),
            schemes=schemes,
            fractions=[fraction],
            snr_grid=snr_grid or STABILITY_SNR_GRID,
            noise_mode="perturb",
            trials=trials or self.trials,
        ))

    def run_robustness(self, signal: Optional[SignalSpec] = None,
                       snr_grid: Optional[List[float]] = None,
                       scheme: Optional[SamplingScheme] = None,
                       trials: Optional[int] = None,
                       fraction: float = 0.10) -> ExperimentReport:
        """测量噪声下的重建误差，delta 由噪声范数确定"""
        return self.run(self._spec(
            name="robustness",
            signal=signal or SignalSpec.preset("coarse"),
            schemes=[scheme or SamplingScheme(variant="uniform")],
            fractions=[fraction],
            snr_grid=snr_grid or ROBUSTNESS_SNR_GRID,
            noise_mode="measurement",
            trials=trials or self.trials,
        ))

    def run_price_of_randomness(self, signal: Optional[SignalSpec] = None, M: int = 32,
                                trials: Optional[int] = None) -> ExperimentReport:
        """确定性低频带 {-2M..2M} 与同样数量均匀随机频率的比较"""
        count = 4 * M + 1
        return self.run(self._spec(
            name="price-of-randomness",
            signal=signal or SignalSpec.preset("coarse"),
            schemes=[SamplingScheme(variant="low_frequency", M=M), SamplingScheme(variant="uniform")],
            counts=[count],
            trials=trials or self.trials,
        ))

    def run_structured_sampling_2d(self, signal: Optional[SignalSpec] = None, fraction: float = 0.2,
                                   trials: Optional[int] = None) -> ExperimentReport:
        """二维幻影在均匀、最低频、均匀 + 幂律与多层采样下的比较"""
        schemes = [
            SamplingScheme(variant="uniform", dim=2),
            SamplingScheme(variant="lowest", dim=2),
            SamplingScheme(variant="union", components=[
                SamplingScheme(variant="uniform", dim=2), SamplingScheme(variant="power_law_2d")]),
            SamplingScheme(variant="multilevel"),
        ]
        return self.run(self._spec(
            name="structured-2d",
            signal=signal or SignalSpec.preset("phantom"),
            schemes=schemes,
            fractions=[fraction],
            trials=trials or self.trials,
        ))

    def run_named(self, name: str, **kwargs) -> ExperimentReport:
        """按名称运行预置实验"""
        experiments = {
            "table1": self.run_table1,
            "stability": self.run_stability_comparison,
            "robustness": self.run_robustness,
            "price-of-randomness": self.run_price_of_randomness,
            "structured-2d": self.run_structured_sampling_2d,
        }
        if name not in experiments:
            raise InputValidationError(f"未知实验: {name}，可选 {sorted(experiments)}")
        return experiments[name](**kwargs)
