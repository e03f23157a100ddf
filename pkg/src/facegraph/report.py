"""Render CSV tables and figures from pipeline outputs.

The delimited files the pipeline writes are the machine interface; this
module is the human one. Each render function takes already-computed
objects, writes a CSV next to a PNG, and returns the written paths.
Rendering is strictly one-way: nothing here feeds back into the
pipeline.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .calibration import CalibrationResult
from .cooccurrence import OccurrenceCounts
from .dictionary import FilterMetrics, FilterReport

__all__ = [
    "render_calibration",
    "render_filter_metrics",
    "render_occurrences",
]


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def render_calibration(result: CalibrationResult, out_dir: str | Path) -> list[Path]:
    """Write per-fold threshold table and chart for one calibration run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "calibration.csv"
    png_path = out_dir / "calibration.png"

    rows = [
        [fold, f"{threshold:.6f}"]
        for fold, threshold in enumerate(result.per_fold_thresholds)
    ]
    rows.append(["mean", f"{result.mean_threshold:.6f}"])
    rows.append(["std", f"{result.threshold_std:.6f}"])
    rows.append(["mean_accuracy", f"{result.mean_accuracy:.6f}"])
    _write_csv(csv_path, ["fold", "value"], rows)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    folds = range(len(result.per_fold_thresholds))
    ax.bar(folds, result.per_fold_thresholds, color="#4878a8")
    ax.axhline(result.mean_threshold, color="#a84848", linewidth=1.2,
               label=f"mean {result.mean_threshold:.3f}")
    ax.set_xlabel("fold")
    ax.set_ylabel("best threshold")
    ax.set_title("per-fold verification thresholds")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def render_filter_metrics(
    entries: Sequence[tuple[FilterReport, FilterMetrics]],
    out_dir: str | Path,
) -> list[Path]:
    """Write a metrics table plus grouped precision/recall/F1 bars.

    One entry per (entity, strategy) evaluation; entries keep their
    given order in both outputs.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "filter_metrics.csv"
    png_path = out_dir / "filter_metrics.png"

    rows = [
        [
            report.entity_id,
            report.strategy,
            f"{report.threshold:.6f}",
            len(report.kept),
            len(report.removed),
            f"{metrics.precision:.6f}",
            f"{metrics.recall:.6f}",
            f"{metrics.f1:.6f}",
        ]
        for report, metrics in entries
    ]
    _write_csv(
        csv_path,
        ["entity_id", "strategy", "threshold", "kept", "removed",
         "precision", "recall", "f1"],
        rows,
    )

    labels = [f"{r.entity_id}\n{r.strategy}" for r, _ in entries]
    x = range(len(entries))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(entries)), 3.5))
    ax.bar([i - width for i in x], [m.precision for _, m in entries],
           width, label="precision", color="#4878a8")
    ax.bar(list(x), [m.recall for _, m in entries],
           width, label="recall", color="#6aa84f")
    ax.bar([i + width for i in x], [m.f1 for _, m in entries],
           width, label="F1", color="#a87848")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_title("sample filtering quality by strategy")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def render_occurrences(
    counts: OccurrenceCounts,
    out_dir: str | Path,
    names: Mapping[str, str] | None = None,
    top_n: int = 20,
) -> list[Path]:
    """Write single/joint count tables and top-N charts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = dict(names or {})

    def label(eid: str) -> str:
        return names.get(eid) or eid

    singles = sorted(counts.singles.items(), key=lambda kv: (-kv[1], kv[0]))
    joints = sorted(counts.joints.items(), key=lambda kv: (-kv[1], kv[0]))

    entity_csv = out_dir / "entity_counts.csv"
    pair_csv = out_dir / "pair_counts.csv"
    png_path = out_dir / "occurrences.png"

    _write_csv(
        entity_csv,
        ["entity_id", "label", "images"],
        [[eid, label(eid), n] for eid, n in singles],
    )
    _write_csv(
        pair_csv,
        ["entity_a", "entity_b", "label_a", "label_b", "images_together"],
        [[a, b, label(a), label(b), n] for (a, b), n in joints],
    )

    fig, (ax1, ax2) = plt.subplots(
        1, 2, figsize=(11, max(3.0, 0.32 * min(top_n, max(len(singles), 1))))
    )
    top_singles = singles[:top_n]
    if top_singles:
        ax1.barh([label(e) for e, _ in reversed(top_singles)],
                 [n for _, n in reversed(top_singles)], color="#4878a8")
    ax1.set_title(f"most-pictured persons (top {len(top_singles)})")
    ax1.set_xlabel("images")
    top_joints = joints[:top_n]
    if top_joints:
        ax2.barh(
            [f"{label(a)} + {label(b)}" for (a, b), _ in reversed(top_joints)],
            [n for _, n in reversed(top_joints)], color="#6aa84f",
        )
    ax2.set_title(f"most-frequent pairs (top {len(top_joints)})")
    ax2.set_xlabel("images together")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [entity_csv, pair_csv, png_path]
