#!/usr/bin/env python3
"""
实验报告测试
"""

import math
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from core.report_builder import (
    CSV_COLUMNS, ExperimentReport, TrialReport, emit_report, read_csv, write_csv, write_svg,
)
from utils.errors import InputValidationError


def make_report() -> ExperimentReport:
    truth = np.array([1.0, 2.0, 3.0, 4.0])
    trials = []
    for scheme, factor in (("uniform", 0.1), ("union(uniform+power_law_1d)", 0.05)):
        for snr in (10.0, 20.0, math.inf):
            for trial in range(3):
                err = factor / (1 + trial) if math.isfinite(snr) else 1e-6
                recon = truth * (1 + err)
                trials.append(TrialReport(scheme, 0.15, snr, trial, 1000 + trial, err, err / 2,
                                          1e-9, 100 + trial, True, recon))
    return ExperimentReport("demo", trials, truth, 1e-3)


class TestExperimentReport:
    """汇总"""

    def test_frame_columns(self):
        frame = make_report().to_frame()
        assert list(frame.columns) == CSV_COLUMNS
        assert len(frame) == 18

    def test_summary(self):
        summary = make_report().summary()
        assert len(summary) == 6
        row = summary[(summary["scheme"] == "uniform") & (summary["snr_db"] == 10.0)].iloc[0]
        assert row["mean_rel_err"] == pytest.approx((0.1 + 0.05 + 0.1 / 3) / 3)
        assert row["trials"] == 3
        exact = summary[summary["snr_db"] == math.inf]["exact"].tolist()
        assert exact == [3, 3]

    def test_mean_curve_and_cells(self):
        report = make_report()
        curve = report.mean_curve("uniform")
        assert list(curve.index) == [10.0, 20.0, math.inf]
        assert len(report.cell("uniform", 0.15, 20.0)) == 3
        assert report.schemes() == ["uniform", "union(uniform+power_law_1d)"]

    def test_recompute_errors(self):
        report = make_report()
        recomputed = report.recompute_errors()
        assert max(abs(a - t.rel_err) for a, t in zip(recomputed, report.trials)) < 1e-12

    def test_empty_summary(self):
        assert ExperimentReport("empty").summary().empty


class TestEmission:
    """CSV 与 SVG"""

    def test_csv_round_trip(self, tmp_path):
        report = make_report()
        path = write_csv(report, tmp_path / "r.csv")
        back = read_csv(path)
        expected = report.to_frame()
        pd.testing.assert_frame_equal(back, expected, check_dtype=False)

    def test_empty_csv_has_header(self, tmp_path):
        path = write_csv(ExperimentReport("empty"), tmp_path / "empty.csv")
        assert path.read_text(encoding="utf-8").strip() == ",".join(CSV_COLUMNS)

    def test_svg_has_one_curve_per_scheme(self, tmp_path):
        path = write_svg(make_report(), tmp_path / "r.svg")
        root = ET.parse(path).getroot()
        ids = [el.get("id") for el in root.iter() if (el.get("id") or "").startswith("curve-")]
        assert sorted(ids) == ["curve-uniform", "curve-union(uniform+power_law_1d)"]

    def test_emit_report(self, tmp_path):
        assert emit_report(make_report(), tmp_path / "out.csv", "csv").exists()
        with pytest.raises(InputValidationError):
            emit_report(make_report(), tmp_path / "out.png", "png")

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(OSError):
            emit_report(make_report(), blocker / "out.csv", "csv")
