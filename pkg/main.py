#!/usr/bin/env python3
"""
gradcs - 部分傅里叶测量下的梯度稀疏信号重建工具包

主要功能：
- 生成分段常数测试信号与频率采样掩码
- 由部分傅里叶测量做约束 TV 最小化重建
- 构造并检验对偶证书与恢复充分条件
- 运行可复现的数值实验并输出 CSV / SVG 报告
"""

import functools
import math
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
import numpy as np
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from core.analysis import (
    ConditionReport, DualCertificate, SupportSet, candes_plan_conditions, dual_certificate,
    fejer_conditions, min_separation,
)
from core.experiment_runner import ExperimentRunner
from core.report_builder import ExperimentReport, emit_report
from core.sampling import (
    MeasurementSet, SamplingMask, SamplingScheme, bernoulli_mask, build_mask, low_frequency_mask, measure,
)
from core.signals import SignalSpec, gen_piecewise_signal
from core.solver import ReconResult, SolverConfig, TVSolver, ensure_converged
from utils.config_manager import ConfigManager
from utils.errors import (
    EXIT_NOT_CONVERGED, EXIT_VALIDATION, ConvergenceFailure, InputValidationError, require,
)
from utils.file_formats import (
    read_mask, read_measurements, read_signal, write_mask, write_measurements, write_metrics,
    write_signal,
)
from utils.logger_setup import setup_logger
from utils.rng import derive_rng


console = Console()


class GradCSToolkit:
    """gradcs 工具包主类"""

    def __init__(self, config_path: Optional[str] = None):
        """初始化工具包"""
        self.config_manager = ConfigManager(config_path)
        self.config = self.config_manager.get_config()

        # 设置日志
        setup_logger(self.config.get('logging', {}))

        # 初始化核心组件
        self.solver_config = SolverConfig.from_config(self.config)
        self.runner = ExperimentRunner(self.config, threads=self.config_manager.thread_limit())

        logger.info("gradcs 工具包已初始化")

    def generate_signal(self, spec: SignalSpec, seed: int,
                        out: Optional[str] = None) -> Tuple[np.ndarray, Optional[SupportSet]]:
        """生成测试信号，可选写入文件"""
        x, support = gen_piecewise_signal(spec, seed)
        if out:
            write_signal(out, x)
            logger.success(f"信号已写入: {out}")
        return x, support

    def generate_mask(self, scheme: SamplingScheme, n: int, m: Optional[int], seed: int,
                      out: Optional[str] = None, symmetrize: bool = False) -> SamplingMask:
        """按方案生成采样掩码；未给出 m 时取 10% 的频率"""
        if m is None:
            m = max(1, int(round(0.1 * n ** scheme.dim)))
        mask = build_mask(scheme, n, m, seed)
        if symmetrize:
            mask = mask.symmetrized()
        logger.info(f"掩码已生成: {scheme.tag()}, N={n}, 抽样 {mask.size} 条")
        if out:
            write_mask(out, mask)
        return mask

    def measure(self, x: np.ndarray, mask: SamplingMask, delta: float, seed: int,
                noise: str = "gaussian", out: Optional[str] = None) -> MeasurementSet:
        """对信号做部分傅里叶测量"""
        meas = measure(x, mask, delta, seed, noise)
        if out:
            write_measurements(out, meas)
            logger.success(f"测量已写入: {out}")
        return meas

    def reconstruct(self, meas: MeasurementSet, out: Optional[str] = None, require_converged: bool = False,
                    **overrides) -> ReconResult:
        """TV 最小化重建；require_converged 时未收敛抛出 ConvergenceFailure（结果文件照常写出）"""
        config = self.solver_config.model_copy(
            update={k: v for k, v in overrides.items() if v is not None})
        result = TVSolver(config).solve(meas)
        if out:
            write_signal(out, result.signal)
            write_metrics(out, result.metrics_line())
            logger.success(f"重建结果已写入: {out}")
        if require_converged:
            ensure_converged(result)
        return result

    def certify(self, n: int, M: int, s: int, seed: int, q: float = 1.0,
                spacing: Optional[int] = None) -> Tuple[DualCertificate, ConditionReport, ConditionReport]:
        """等间距支撑、随机单位符号下构造对偶证书并检查充分条件"""
        require(0 < q <= 1, f"q 须位于 (0, 1]，实际 {q}")
        spacing = spacing or n // s
        support = SupportSet.equispaced(n, s, spacing)
        rng = derive_rng(seed, "signs")
        signs = np.exp(2j * np.pi * rng.random(s))
        if q >= 1.0:
            mask = low_frequency_mask(n, M, 4 * M + 1, seed)
        else:
            mask = bernoulli_mask(M, q, seed, n=n)
        logger.info(f"证书: N={n}, M={M}, s={s}, 最小间隔 {min_separation(support):.4g}, 频率 {mask.size} 个")

        cert = dual_certificate(support, signs, M, mask, q)
        fejer = fejer_conditions(cert)
        plan = candes_plan_conditions(mask, support, certificate=cert)
        return cert, fejer, plan

    def run_experiment(self, name: str, out: Optional[str] = None, fmt: str = "csv",
                       **kwargs) -> ExperimentReport:
        """运行预置实验并输出报告"""
        try:
            report = self.runner.run_named(name, **kwargs)
        except Exception as e:
            logger.error(f"实验 {name} 运行失败: {e}")
            raise
        if out:
            formats = ("csv", "svg") if fmt == "both" else (fmt,)
            for item in formats:
                path = Path(out)
                if len(formats) > 1 or path.suffix.lower() != f".{item}":
                    path = path.with_suffix(f".{item}")
                emit_report(report, path, item)
        return report


# ---------------------------------------------------------------- 命令行

def _handle_errors(func):
    """把工具包异常映射为退出码"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConvergenceFailure as e:
            logger.error(str(e))
            click.echo(f"未收敛: {e}", err=True)
            sys.exit(EXIT_NOT_CONVERGED)
        except (InputValidationError, ValidationError, OSError) as e:
            logger.error(f"输入无效: {e}")
            click.echo(f"错误: {e}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


def _config_option(func):
    return click.option("--config", "config_path", type=click.Path(), default=None,
                        help="配置文件路径（YAML 或 key=value）")(func)


def _print_table(title: str, rows: Dict[str, Any]):
    table = Table(title=title)
    table.add_column("项目")
    table.add_column("值")
    for key, value in rows.items():
        table.add_row(str(key), str(value))
    console.print(table)


@click.group()
def cli():
    """gradcs: 部分傅里叶测量下的 TV 最小化重建"""


@cli.command("gen-signal")
@_config_option
@click.option("--kind", type=click.Choice(["coarse", "fine", "phantom"]), default="coarse")
@click.option("--n", "n", type=int, default=None, help="信号长度（二维为边长）")
@click.option("--s", "s", type=int, default=None, help="梯度跳变个数")
@click.option("--min-sep", type=float, default=None, help="最小间隔（按 N 归一化）")
@click.option("--seed", type=int, default=0)
@click.option("--complex-valued", is_flag=True, default=False)
@click.option("--out", required=True, type=click.Path())
@_handle_errors
def gen_signal(config_path, kind, n, s, min_sep, seed, complex_valued, out):
    """生成分段常数测试信号"""
    toolkit = GradCSToolkit(config_path)
    values = SignalSpec.preset(kind, n).model_dump()
    values.update({k: v for k, v in {"s": s, "min_sep": min_sep}.items() if v is not None})
    values["complex_valued"] = complex_valued
    spec = SignalSpec(**values)
    x, support = toolkit.generate_signal(spec, seed, out)
    rows = {"kind": spec.kind, "shape": x.shape, "out": out}
    if support is not None:
        rows.update({"support": support.indices.tolist(), "min_separation": min_separation(support)})
    _print_table("测试信号", rows)


@cli.command("gen-mask")
@_config_option
@click.option("--scheme", type=str, default=None, help="采样方案标签，如 uniform、power_law_1d、low_frequency(M=32)")
@click.option("--n", "n", type=int, required=True)
@click.option("--m", "m", type=int, default=None, help="抽样次数（缺省为 10%）")
@click.option("--seed", type=int, default=None)
@click.option("--symmetrize", is_flag=True, default=False, help="补全 -k")
@click.option("--out", required=True, type=click.Path())
@_handle_errors
def gen_mask(config_path, scheme, n, m, seed, symmetrize, out):
    """生成频率采样掩码"""
    toolkit = GradCSToolkit(config_path)
    tag = scheme or toolkit.config_manager.get("sampling.scheme", "uniform")
    seed = seed if seed is not None else int(toolkit.config_manager.get("sampling.seed", 0))
    mask = toolkit.generate_mask(SamplingScheme.from_tag(tag), n, m, seed, out, symmetrize)
    _print_table("采样掩码", {
        "scheme": mask.scheme.tag(), "n": mask.n, "m": mask.m, "entries": mask.size,
        "unique": mask.unique().shape[0], "includes_zero": mask.includes_zero, "out": out,
    })


@cli.command("measure")
@_config_option
@click.option("--signal", "signal_path", required=True, type=click.Path())
@click.option("--mask", "mask_path", required=True, type=click.Path())
@click.option("--delta", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--noise", type=click.Choice(["gaussian", "uniform"]), default="gaussian")
@click.option("--out", required=True, type=click.Path())
@_handle_errors
def measure_cmd(config_path, signal_path, mask_path, delta, seed, noise, out):
    """测量 y = P_Ω A x + eta"""
    toolkit = GradCSToolkit(config_path)
    x, kind = read_signal(signal_path)
    require(kind == "signal", f"{signal_path} 是频谱文件，不是信号")
    meas = toolkit.measure(x, read_mask(mask_path), delta, seed, noise, out)
    _print_table("测量", {"entries": meas.mask.size, "delta": meas.delta,
                          "noise_radius": meas.noise_radius, "out": out})


@cli.command("reconstruct")
@_config_option
@click.option("--measurements", "meas_path", required=True, type=click.Path())
@click.option("--delta", type=float, default=None, help="覆盖测量文件中的 delta")
@click.option("--max-outer", type=int, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--mu", type=float, default=None)
@click.option("--allow-unconverged", is_flag=True, default=False, help="未收敛时仍以退出码 0 结束（缺省为 3）")
@click.option("--out", required=True, type=click.Path())
@_handle_errors
def reconstruct_cmd(config_path, meas_path, delta, max_outer, lam, mu, allow_unconverged, out):
    """约束 TV 最小化重建"""
    toolkit = GradCSToolkit(config_path)
    meas = read_measurements(meas_path)
    if delta is not None:
        meas = MeasurementSet(meas.mask, meas.y, delta, meas.meta)
    result = toolkit.reconstruct(meas, out, not allow_unconverged, max_outer=max_outer, lam=lam, mu=mu)
    _print_table("重建结果", {
        "outer_iterations": result.outer_iterations,
        "final_residual": f"{result.final_residual:.3e}",
        "final_tv": f"{result.final_tv:.6g}",
        "converged": result.converged,
        "out": out,
    })


@cli.command("certify")
@_config_option
@click.option("--n", "n", type=int, default=512)
@click.option("--M", "M", type=int, default=64, help="截止参数，频带为 {-2M, ..., 2M}")
@click.option("--s", "s", type=int, default=4)
@click.option("--spacing", type=int, default=None, help="支撑间距（缺省为 N // s）")
@click.option("--q", type=float, default=1.0, help="伯努利采样率，1 表示取满频带")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None, help="条件报告输出文件")
@_handle_errors
def certify_cmd(config_path, n, M, s, spacing, q, seed, out):
    """构造对偶证书并检查恢复充分条件"""
    toolkit = GradCSToolkit(config_path)
    cert, fejer, plan = toolkit.certify(n, M, s, seed, q, spacing)

    table = Table(title="充分条件")
    for column in ("条件", "数值", "阈值", "结果"):
        table.add_column(column)
    lines = []
    for prefix, report in (("fejer", fejer), ("plan", plan)):
        for label, entry in report.entries.items():
            table.add_row(f"{prefix}:{label}", f"{entry.value:.4g}", f"{entry.threshold:.4g}",
                          "pass" if entry.passed else "fail")
        lines.extend(f"{prefix}:{line}" for line in report.lines())
        lines.extend(f"# {note}" for note in report.notes)
    console.print(table)
    if not cert.solvable:
        click.echo("插值系统奇异，证书不存在", err=True)
    if out:
        Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.success(f"条件报告已写入: {out}")


@cli.command("experiment")
@_config_option
@click.option("--name", required=True,
              type=click.Choice(["table1", "stability", "robustness", "price-of-randomness", "structured-2d"]))
@click.option("--n", "n", type=int, default=None, help="覆盖预置信号尺寸")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None, help="覆盖主种子")
@click.option("--format", "fmt", type=click.Choice(["csv", "svg", "both"]), default="csv")
@click.option("--out", type=click.Path(), default=None)
@_handle_errors
def experiment_cmd(config_path, name, n, trials, seed, fmt, out):
    """运行预置数值实验"""
    toolkit = GradCSToolkit(config_path)
    if seed is not None:
        toolkit.runner.master_seed = seed
    kwargs: Dict[str, Any] = {}
    if trials is not None:
        kwargs["trials"] = trials
    if n is not None:
        kwargs["signal"] = SignalSpec.preset("phantom" if name == "structured-2d" else "coarse", n)
    report = toolkit.run_experiment(name, out, fmt, **kwargs)

    summary = report.summary()
    table = Table(title=f"实验 {name}")
    for column in summary.columns:
        table.add_column(str(column))
    for row in summary.itertuples(index=False):
        table.add_row(*[f"{v:.4g}" if isinstance(v, float) and math.isfinite(v) else str(v) for v in row])
    console.print(table)


if __name__ == "__main__":
    cli()
