"""Run reports: one delimited metrics file plus rendered figures.

The CSV is long-form (section, name, value) so downstream tooling can
pivot it however it likes; the figures summarize the same snapshot for
humans.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .runtime.metrics import MetricsSnapshot


def write_metrics_csv(path: Path, snap: MetricsSnapshot) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["section", "name", "value"])
        w.writerow(["run", "efps", f"{snap.efps:.4f}"])
        w.writerow(["run", "elapsed_s", f"{snap.elapsed_s:.4f}"])
        for name in ("frames_in", "frames_processed", "frames_dropped",
                     "clips_emitted", "samples_classified", "classifier_errors"):
            w.writerow(["counters", name, getattr(snap, name)])
        for level, count in sorted(snap.alerts_by_level.items()):
            w.writerow(["alerts", level, count])
        for stage, st in snap.stage_stats.items():
            w.writerow([f"stage_{stage}", "samples", st.samples])
            w.writerow([f"stage_{stage}", "mean_ms", f"{st.mean_ms:.4f}"])
            w.writerow([f"stage_{stage}", "p95_ms", f"{st.p95_ms:.4f}"])
        for lat in snap.clip_latencies:
            sec = f"clip_{lat.clip_index}"
            w.writerow([sec, "buffer_fill_ms", f"{lat.buffer_fill_ms:.4f}"])
            w.writerow([sec, "inference_ms", f"{lat.inference_ms:.4f}"])
            w.writerow([sec, "end_to_end_ms", f"{lat.end_to_end_ms:.4f}"])


def _latency_figure(path: Path, snap: MetricsSnapshot, title: str) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if snap.clip_latencies:
        idx = [lat.clip_index for lat in snap.clip_latencies]
        fill = [lat.buffer_fill_ms for lat in snap.clip_latencies]
        infer = [lat.inference_ms for lat in snap.clip_latencies]
        ax.bar(idx, fill, label="buffer fill", color="#4a7dbd")
        ax.bar(idx, infer, bottom=fill, label="inference", color="#d07b38")
        ax.set_xlabel("clip index")
        ax.set_ylabel("latency (ms)")
        ax.legend()
    else:
        stages = list(snap.stage_stats)
        means = [snap.stage_stats[s].mean_ms for s in stages]
        p95s = [snap.stage_stats[s].p95_ms for s in stages]
        x = range(len(stages))
        ax.bar([i - 0.2 for i in x], means, width=0.4, label="mean", color="#4a7dbd")
        ax.bar([i + 0.2 for i in x], p95s, width=0.4, label="p95", color="#d07b38")
        ax.set_xticks(list(x), stages)
        ax.set_ylabel("stage time (ms)")
        ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _counters_figure(path: Path, snap: MetricsSnapshot, title: str) -> None:
    names = ["frames_in", "frames_processed", "frames_dropped",
             "clips_emitted", "samples_classified"]
    values = [getattr(snap, n) for n in names]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(names, values, color="#5b8a5b")
    ax.set_ylabel("count")
    ax.set_title(f"{title} (eFPS {snap.efps:.1f})")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_report(report_dir: str | Path, snap: MetricsSnapshot, title: str) -> list[Path]:
    """Render metrics.csv plus the two summary figures; returns the paths."""
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        report_dir / "metrics.csv",
        report_dir / "latency_breakdown.png",
        report_dir / "run_counters.png",
    ]
    write_metrics_csv(paths[0], snap)
    _latency_figure(paths[1], snap, title)
    _counters_figure(paths[2], snap, title)
    return paths
