"""
日志设置模块

控制台输出之外，可选写入滚动日志文件与求解器迭代轨迹。
GRADCS_LOG_LEVEL 覆盖配置中的日志级别。
"""

import os
import sys
from pathlib import Path
from typing import Any, Dict, List

from loguru import logger


DEFAULT_FORMAT = '{time:YYYY-MM-DD HH:mm:ss} | {level} | {name} | {message}'
SOLVER_MODULE = "core.solver"


def _only_solver(record) -> bool:
    return record["name"] == SOLVER_MODULE


def setup_logger(config: Dict[str, Any]) -> List[int]:
    """按 logging 配置段重建全部日志处理器，返回处理器 id"""
    logger.remove()

    level = os.environ.get("GRADCS_LOG_LEVEL") or config.get('level', 'INFO')
    format_str = config.get('format', DEFAULT_FORMAT)
    file_options = {
        "format": format_str,
        "rotation": config.get('rotation', '1 day'),
        "retention": config.get('retention', '7 days'),
        "encoding": "utf-8",
    }

    sinks = [logger.add(sys.stderr, level=level, format=format_str, colorize=True)]

    file_enabled = config.get('file_enabled', False)
    trace_enabled = config.get('solver_trace', False)
    if not (file_enabled or trace_enabled):
        return sinks

    log_dir = Path(config.get('log_dir', 'logs'))
    log_dir.mkdir(parents=True, exist_ok=True)

    if file_enabled:
        sinks.append(logger.add(log_dir / "gradcs.log", level=level, **file_options))
        sinks.append(logger.add(log_dir / "error.log", level="ERROR", **file_options))

    # 外迭代残差与 TV，频率由 solver.log_every 决定
    if trace_enabled:
        sinks.append(logger.add(log_dir / "solver_trace.log", level="DEBUG",
                                filter=_only_solver, **file_options))

    logger.debug(f"日志已写入 {log_dir}（级别 {level}）")
    return sinks
