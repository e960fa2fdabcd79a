#!/usr/bin/env python3
"""
文本文件格式测试
"""

import numpy as np
import pytest

from core.sampling import SamplingScheme, build_mask, measure, uniform_mask
from core.transforms import dft
from utils.errors import InputValidationError
from utils.file_formats import (
    read_mask, read_measurements, read_signal, write_mask, write_measurements, write_metrics,
    write_signal, write_spectrum,
)


class TestSignalFiles:
    """信号与频谱"""

    def test_signal_lossless(self, tmp_path, rng):
        x = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        path = tmp_path / "x.txt"
        write_signal(path, x)
        back, kind = read_signal(path)
        assert kind == "signal"
        assert back.tobytes() == x.tobytes()

    def test_two_dimensional(self, tmp_path, rng):
        x = rng.standard_normal((4, 4)).astype(complex)
        write_signal(tmp_path / "x2.txt", x)
        back, _ = read_signal(tmp_path / "x2.txt")
        assert np.array_equal(back, x)

    def test_spectrum_ascending_order(self, tmp_path, rng):
        x = rng.standard_normal(8)
        spectrum = dft(x)
        path = tmp_path / "s.txt"
        write_spectrum(path, spectrum)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0].endswith("kind=spectrum")
        # 第一行数据对应 k = -3，存储位置 5
        first = complex(*map(float, lines[1].split(",")))
        assert first == spectrum[5]
        back, kind = read_signal(path)
        assert kind == "spectrum"
        assert np.array_equal(back, spectrum)

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("gradcs-signal v1 dim=1 n=3\n1.0,0.0\n", encoding="utf-8")
        with pytest.raises(InputValidationError):
            read_signal(path)
        path.write_text("something else\n", encoding="utf-8")
        with pytest.raises(InputValidationError):
            read_signal(path)
        with pytest.raises(InputValidationError):
            read_signal(tmp_path / "missing.txt")


class TestMaskFiles:
    """掩码"""

    def test_round_trip_with_duplicates(self, tmp_path):
        scheme = SamplingScheme.from_tag("union(uniform+power_law_1d)")
        mask = build_mask(scheme, 64, 40, seed=3)
        path = tmp_path / "mask.txt"
        write_mask(path, mask)
        back = read_mask(path)
        assert np.array_equal(back.indices, mask.indices)
        assert back.scheme.tag() == mask.scheme.tag()
        assert (back.m, back.seed, back.includes_zero) == (mask.m, mask.seed, mask.includes_zero)

    def test_two_dimensional(self, tmp_path):
        mask = uniform_mask(16, 20, seed=1, dim=2)
        write_mask(tmp_path / "m2.txt", mask)
        back = read_mask(tmp_path / "m2.txt")
        assert np.array_equal(back.indices, mask.indices)
        assert back.dim == 2


class TestMeasurementFiles:
    """测量与指标旁注"""

    def test_round_trip(self, tmp_path, rng):
        x = rng.standard_normal(32)
        meas = measure(x, uniform_mask(32, 8, seed=2), 0.125, seed=5)
        path = tmp_path / "y.txt"
        write_measurements(path, meas)
        back = read_measurements(path)
        assert back.delta == 0.125
        assert back.y.tobytes() == meas.y.tobytes()
        assert np.array_equal(back.mask.indices, meas.mask.indices)

    def test_metrics_sidecar(self, tmp_path):
        sidecar = write_metrics(tmp_path / "out.txt", "outer_iterations=3 converged=true")
        assert sidecar.name == "out.txt.metrics"
        assert sidecar.read_text(encoding="utf-8").strip() == "outer_iterations=3 converged=true"
