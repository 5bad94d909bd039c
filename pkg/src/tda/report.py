"""Report rendering: aligned text tables, CSV files, and figure files.

CSV is the machine-readable format; figures are PNG renderings of the
same numbers written next to the CSV for quick visual inspection.
matplotlib is imported lazily with the Agg backend so headless runs and
figure-free runs never touch a display.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from .stream import GridResult, RunReport


def format_table(headers: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """Monospace-aligned table; right-aligns anything numeric-looking."""
    srows = [[_cell(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in srows:
        for j, cell in enumerate(row):
            widths[j] = max(widths[j], len(cell))
    lines = [
        "  ".join(h.ljust(widths[j]) for j, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in srows:
        lines.append("  ".join(cell.rjust(widths[j]) if _numeric(cell) else cell.ljust(widths[j])
                               for j, cell in enumerate(row)))
    return "\n".join(lines)


def _cell(v: object) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        if math.isnan(v):
            return "-"
        return f"{v:.4f}" if abs(v) < 1000 else f"{v:.1f}"
    return str(v)


def _numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


REPORT_HEADERS = [
    "method", "top1_accuracy", "samples_processed", "labeled_samples",
    "wall_time_s", "throughput_sps",
    "pos_fill", "pos_mean_entropy", "pos_purity",
    "neg_fill", "neg_mean_entropy", "neg_purity",
]


def report_row(rep: RunReport) -> list[object]:
    pos = rep.cache_stats.get("positive", {})
    neg = rep.cache_stats.get("negative", {})
    return [
        rep.method, rep.top1_accuracy, rep.samples_processed, rep.labeled_samples,
        rep.wall_time, rep.throughput,
        pos.get("fill_ratio"), pos.get("mean_entropy"), pos.get("label_purity"),
        neg.get("fill_ratio"), neg.get("mean_entropy"), neg.get("label_purity"),
    ]


def write_csv(path: str | Path, headers: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow(["" if v is None or (isinstance(v, float) and math.isnan(v)) else v
                             for v in row])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_compare_figure(reports: Sequence[RunReport], path: str | Path) -> None:
    """Bar chart of top-1 accuracy per method."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    names = [r.method for r in reports]
    accs = [r.top1_accuracy for r in reports]
    bars = ax.bar(names, accs, color="#4878a8")
    ax.bar_label(bars, fmt="%.2f", fontsize=9)
    ax.set_ylabel("top-1 accuracy (%)")
    ax.set_ylim(0, min(105.0, max(accs) * 1.15 + 5))
    ax.set_title(f"method comparison over {reports[0].samples_processed} samples")
    ax.tick_params(axis="x", rotation=15)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_grid_figure(result: GridResult, path: str | Path) -> None:
    """Accuracy against the swept hyperparameter.

    With exactly one varied parameter this is the familiar sensitivity
    curve; with several, combinations are plotted ranked best-first.
    """
    plt = _pyplot()
    rows = result.rows
    varied = [k for k in rows[0].params if len({r.params[k] for r in rows}) > 1] if rows else []
    fig, ax = plt.subplots(figsize=(7, 4))
    if len(varied) == 1:
        key = varied[0]
        pts = sorted((r.params[key], r.report.top1_accuracy) for r in rows)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", color="#4878a8")
        ax.set_xlabel(key)
    else:
        accs = [r.report.top1_accuracy for r in rows]
        ax.plot(range(1, len(accs) + 1), accs, marker="o", color="#4878a8")
        ax.set_xlabel("configuration rank")
    ax.set_ylabel("top-1 accuracy (%)")
    ax.set_title("grid search")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_inspect_figure(summary: dict, path: str | Path) -> None:
    """Entropy distribution and per-class fill for each dumped cache."""
    plt = _pyplot()
    caches = summary["caches"]
    fig, axes = plt.subplots(len(caches), 2, figsize=(9, 3.2 * len(caches)), squeeze=False)
    for i, (name, data) in enumerate(caches.items()):
        rows = data["rows"]
        ax = axes[i][0]
        ax.bar([r["class_id"] for r in rows], [r["count"] for r in rows], color="#4878a8")
        ax.set_title(f"{name} cache: entries per class")
        ax.set_xlabel("class id")
        ax.set_ylabel("count")
        ax = axes[i][1]
        med = [r["entropy_median"] for r in rows]
        lo = [r["entropy_min"] for r in rows]
        hi = [r["entropy_max"] for r in rows]
        xs = [r["class_id"] for r in rows]
        ax.vlines(xs, lo, hi, color="#a0a0a0", linewidth=1)
        ax.plot(xs, med, ".", color="#4878a8")
        ax.set_title(f"{name} cache: entropy min/median/max")
        ax.set_xlabel("class id")
        ax.set_ylabel("normalized entropy")
        ax.set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
