"""Tests for CSV/figure rendering."""

from __future__ import annotations

import csv

from facegraph.calibration import CalibrationResult
from facegraph.cooccurrence import OccurrenceCounts
from facegraph.dictionary import FilterMetrics, FilterReport
from facegraph.report import (
    render_calibration,
    render_filter_metrics,
    render_occurrences,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestCalibrationReport:
    def result(self):
        return CalibrationResult(
            mean_threshold=0.61,
            per_fold_thresholds=(0.6, 0.62, 0.61),
            mean_accuracy=0.98,
            threshold_std=0.0081,
            fold_count=3,
        )

    def test_writes_table_and_figure(self, tmp_path):
        paths = render_calibration(self.result(), tmp_path / "out")
        assert [p.name for p in paths] == ["calibration.csv", "calibration.png"]
        rows = read_csv(paths[0])
        assert rows[0] == ["fold", "value"]
        assert rows[1] == ["0", "0.600000"]
        assert rows[4] == ["mean", "0.610000"]
        assert rows[6] == ["mean_accuracy", "0.980000"]
        assert paths[1].read_bytes().startswith(PNG_MAGIC)

    def test_csv_is_deterministic(self, tmp_path):
        a = render_calibration(self.result(), tmp_path / "a")[0]
        b = render_calibration(self.result(), tmp_path / "b")[0]
        assert a.read_bytes() == b.read_bytes()


class TestFilterMetricsReport:
    def test_rows_follow_input_order(self, tmp_path):
        entries = [
            (
                FilterReport("Q1", "mean", 0.757, ("a", "b"), ("c",)),
                FilterMetrics(1.0, 2 / 3, 0.8),
            ),
            (
                FilterReport("Q1", "reference", 0.757, ("a", "b", "c"), ()),
                FilterMetrics(1.0, 1.0, 1.0),
            ),
        ]
        csv_path, png_path = render_filter_metrics(entries, tmp_path)
        rows = read_csv(csv_path)
        assert rows[1][:5] == ["Q1", "mean", "0.757000", "2", "1"]
        assert rows[2][1] == "reference"
        assert rows[2][7] == "1.000000"
        assert png_path.read_bytes().startswith(PNG_MAGIC)


class TestOccurrenceReport:
    def test_tables_sorted_by_count_then_id(self, tmp_path):
        counts = OccurrenceCounts(
            singles={"QB": 3, "QA": 3, "QC": 1},
            joints={("QA", "QB"): 2, ("QB", "QC"): 1},
        )
        entity_csv, pair_csv, png = render_occurrences(
            counts, tmp_path, names={"QA": "Ada"}
        )
        entity_rows = read_csv(entity_csv)
        assert entity_rows[1] == ["QA", "Ada", "3"]
        assert entity_rows[2] == ["QB", "QB", "3"]
        assert entity_rows[3] == ["QC", "QC", "1"]
        pair_rows = read_csv(pair_csv)
        assert pair_rows[1] == ["QA", "QB", "Ada", "QB", "2"]
        assert png.read_bytes().startswith(PNG_MAGIC)

    def test_empty_counts_still_render(self, tmp_path):
        counts = OccurrenceCounts(singles={}, joints={})
        paths = render_occurrences(counts, tmp_path)
        assert all(p.exists() for p in paths)
        assert read_csv(paths[0]) == [["entity_id", "label", "images"]]
