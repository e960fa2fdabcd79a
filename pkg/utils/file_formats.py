"""
文本文件格式

信号、频谱、掩码与测量的 UTF-8 文本读写。首行为 `gradcs-<kind> v1 key=value ...`，其后每行一个数据项：
- 信号 / 频谱：`<re>,<im>`，二维按行优先；频谱按 k = -floor(N/2)+1 ... ceil(N/2) 排列；
- 掩码：`k` 或 `k1,k2`，重复项原样列出；
- 测量：`<index>|<re>,<im>`。
浮点数以 repr 写出，读回无损。
"""

from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from loguru import logger

from core.sampling import MeasurementSet, SamplingMask, SamplingScheme
from core.transforms import frequency_range, freq_to_pos
from utils.errors import InputValidationError, require


PathLike = Union[str, Path]
VERSION = "v1"


def _format_complex(value: complex) -> str:
    return f"{float(value.real)!r},{float(value.imag)!r}"


def _parse_complex(text: str) -> complex:
    parts = text.strip().split(",")
    require(len(parts) == 2, f"复数格式应为 <re>,<im>: {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as e:
        raise InputValidationError(f"无法解析复数: {text!r}") from e


def _write(path: PathLike, header: str, lines: List[str]):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join([header] + lines) + "\n", encoding="utf-8")
    logger.debug(f"已写入 {path}（{len(lines)} 行）")


def _read(path: PathLike, kind: str) -> Tuple[Dict[str, str], List[str]]:
    path = Path(path)
    require(path.exists(), f"文件不存在: {path}")
    content = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    require(bool(content), f"文件为空: {path}")
    tokens = content[0].split()
    require(len(tokens) >= 2 and tokens[0] == f"gradcs-{kind}" and tokens[1] == VERSION,
            f"{path} 不是 gradcs-{kind} {VERSION} 文件")
    header = {}
    for token in tokens[2:]:
        require("=" in token, f"文件头字段格式错误: {token!r}")
        key, value = token.split("=", 1)
        header[key] = value
    return header, content[1:]


def _header_int(header: Dict[str, str], key: str) -> int:
    require(key in header, f"文件头缺少 {key}")
    try:
        return int(header[key])
    except ValueError as e:
        raise InputValidationError(f"文件头字段 {key} 不是整数: {header[key]!r}") from e


def _ascending_positions(n: int) -> np.ndarray:
    lo, hi = frequency_range(n)
    return freq_to_pos(np.arange(lo, hi + 1), n)


# ---------------------------------------------------------------- 信号与频谱

def write_signal(path: PathLike, x, kind: str = "signal"):
    """写信号（kind=signal）或频谱（kind=spectrum，输入为 FFT 顺序）"""
    x = np.asarray(x, dtype=complex)
    require(x.ndim in (1, 2), f"只支持一维或二维数据，实际维度 {x.ndim}")
    require(kind in ("signal", "spectrum"), f"未知数据类型: {kind}")
    n = x.shape[0]
    if kind == "spectrum":
        order = _ascending_positions(n)
        x = x[order] if x.ndim == 1 else x[np.ix_(order, order)]
    header = f"gradcs-signal {VERSION} dim={x.ndim} n={n}"
    if kind == "spectrum":
        header += " kind=spectrum"
    _write(path, header, [_format_complex(v) for v in x.ravel()])


def read_signal(path: PathLike) -> Tuple[np.ndarray, str]:
    """读信号或频谱，返回 (数组, kind)；频谱以 FFT 顺序返回"""
    header, lines = _read(path, "signal")
    dim, n = _header_int(header, "dim"), _header_int(header, "n")
    require(dim in (1, 2), f"维度须为 1 或 2，实际 {dim}")
    expected = n if dim == 1 else n * n
    require(len(lines) == expected, f"数据行数 {len(lines)} 与 N={n}, dim={dim} 不符")
    values = np.array([_parse_complex(line) for line in lines], dtype=complex)
    values = values if dim == 1 else values.reshape(n, n)

    kind = header.get("kind", "signal")
    if kind == "spectrum":
        order = _ascending_positions(n)
        stored = np.empty_like(values)
        if dim == 1:
            stored[order] = values
        else:
            stored[np.ix_(order, order)] = values
        values = stored
    return values, kind


def write_spectrum(path: PathLike, spectrum):
    write_signal(path, spectrum, kind="spectrum")


# ---------------------------------------------------------------- 掩码

def _mask_header(mask: SamplingMask) -> str:
    return (f"dim={mask.dim} n={mask.n} m={mask.m} "
            f"scheme={mask.scheme.tag()} seed={mask.seed}")


def _format_index(index) -> str:
    return ",".join(str(int(k)) for k in np.atleast_1d(index))


def _parse_index(text: str, dim: int):
    parts = text.strip().split(",")
    require(len(parts) == dim, f"索引维度与文件头不符: {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError as e:
        raise InputValidationError(f"无法解析频率索引: {text!r}") from e
    return values[0] if dim == 1 else values


def write_mask(path: PathLike, mask: SamplingMask):
    _write(path, f"gradcs-mask {VERSION} {_mask_header(mask)}",
           [_format_index(k) for k in mask.indices])


def _build_mask(header: Dict[str, str], indices: List) -> SamplingMask:
    dim, n, m = _header_int(header, "dim"), _header_int(header, "n"), _header_int(header, "m")
    scheme = SamplingScheme.from_tag(header.get("scheme", "uniform"))
    array = np.array(indices, dtype=np.int64).reshape(-1) if dim == 1 \
        else np.array(indices, dtype=np.int64).reshape(-1, 2)
    includes_zero = bool(np.any(np.all(array.reshape(-1, dim) == 0, axis=1))) if array.size else False
    return SamplingMask(array, n, dim, m, includes_zero, scheme, _header_int(header, "seed"))


def read_mask(path: PathLike) -> SamplingMask:
    header, lines = _read(path, "mask")
    dim = _header_int(header, "dim")
    return _build_mask(header, [_parse_index(line, dim) for line in lines])


# ---------------------------------------------------------------- 测量

def write_measurements(path: PathLike, meas: MeasurementSet):
    header = f"gradcs-measurements {VERSION} {_mask_header(meas.mask)} delta={meas.delta!r}"
    lines = [f"{_format_index(k)}|{_format_complex(v)}" for k, v in zip(meas.mask.indices, meas.y)]
    _write(path, header, lines)


def read_measurements(path: PathLike) -> MeasurementSet:
    header, lines = _read(path, "measurements")
    dim = _header_int(header, "dim")
    indices, values = [], []
    for line in lines:
        require("|" in line, f"测量行格式应为 <index>|<re>,<im>: {line!r}")
        index, value = line.split("|", 1)
        indices.append(_parse_index(index, dim))
        values.append(_parse_complex(value))
    try:
        delta = float(header.get("delta", "0"))
    except ValueError as e:
        raise InputValidationError(f"delta 不是数值: {header.get('delta')!r}") from e
    return MeasurementSet(_build_mask(header, indices), np.array(values, dtype=complex), delta)


def write_metrics(path: PathLike, line: str) -> Path:
    """在结果文件旁写入单行指标（<path>.metrics）"""
    sidecar = Path(f"{path}.metrics")
    sidecar.write_text(line + "\n", encoding="utf-8")
    return sidecar
