"""Single-writer pipeline metrics with read-only snapshots.

eFPS counts frames fully processed end-to-end.  Per-clip latency is
published as the exact decomposition end_to_end = buffer_fill + inference,
where buffer_fill spans first-window-frame ingest to emission and
inference spans preprocess through risk aggregation.  p95 is nearest-rank.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

STAGES = ("track", "assemble", "preprocess", "classify")


def nearest_rank_p95(values: list[float]) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = max(1, -(-len(ordered) * 95 // 100))  # ceil without float
    return ordered[rank - 1]


@dataclass(frozen=True)
class StageStats:
    mean_ms: float
    p95_ms: float
    samples: int


@dataclass(frozen=True)
class ClipLatency:
    clip_index: int
    buffer_fill_ms: float
    inference_ms: float

    @property
    def end_to_end_ms(self) -> float:
        return self.buffer_fill_ms + self.inference_ms


@dataclass(frozen=True)
class MetricsSnapshot:
    efps: float
    stage_stats: dict[str, StageStats]
    end_to_end_ms_mean: float
    buffer_fill_ms_mean: float
    inference_ms_mean: float
    clip_latencies: tuple[ClipLatency, ...]
    queue_depths: dict[str, int]
    frames_in: int
    frames_processed: int
    frames_dropped: int
    clips_emitted: int
    samples_classified: int
    classifier_errors: int
    alerts_by_level: dict[str, int]
    elapsed_s: float

    def as_dict(self) -> dict:
        return {
            "efps": self.efps,
            "stages": {
                name: {"mean_ms": s.mean_ms, "p95_ms": s.p95_ms, "samples": s.samples}
                for name, s in self.stage_stats.items()
            },
            "end_to_end_ms_mean": self.end_to_end_ms_mean,
            "buffer_fill_ms_mean": self.buffer_fill_ms_mean,
            "inference_ms_mean": self.inference_ms_mean,
            "queue_depths": dict(self.queue_depths),
            "frames_in": self.frames_in,
            "frames_processed": self.frames_processed,
            "frames_dropped": self.frames_dropped,
            "clips_emitted": self.clips_emitted,
            "samples_classified": self.samples_classified,
            "classifier_errors": self.classifier_errors,
            "alerts_by_level": dict(self.alerts_by_level),
            "elapsed_s": self.elapsed_s,
        }


def zero_snapshot() -> MetricsSnapshot:
    return MetricsSnapshot(
        efps=0.0,
        stage_stats={name: StageStats(0.0, 0.0, 0) for name in STAGES},
        end_to_end_ms_mean=0.0,
        buffer_fill_ms_mean=0.0,
        inference_ms_mean=0.0,
        clip_latencies=(),
        queue_depths={},
        frames_in=0,
        frames_processed=0,
        frames_dropped=0,
        clips_emitted=0,
        samples_classified=0,
        classifier_errors=0,
        alerts_by_level={"SAFE": 0, "WARNING": 0, "DANGER": 0},
        elapsed_s=0.0,
    )


@dataclass
class MetricsAccumulator:
    """Mutated by the pipeline only; snapshot() is safe from any thread."""

    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self._stage_samples: dict[str, list[float]] = {n: [] for n in STAGES}
        self._clip_latencies: list[ClipLatency] = []
        self.frames_in = 0
        self.frames_processed = 0
        self.frames_dropped = 0
        self.clips_emitted = 0
        self.samples_classified = 0
        self.classifier_errors = 0
        self.alerts_by_level = {"SAFE": 0, "WARNING": 0, "DANGER": 0}
        self.queue_depth_probe = None  # callable -> dict[str, int]
        self._started = time.monotonic()
        self._first_frame_at: float | None = None
        self._last_frame_at: float | None = None

    def frame_in(self) -> None:
        with self._lock:
            self.frames_in += 1

    def frame_dropped(self) -> None:
        with self._lock:
            self.frames_dropped += 1

    def frame_processed(self) -> None:
        now = time.monotonic()
        with self._lock:
            self.frames_processed += 1
            if self._first_frame_at is None:
                self._first_frame_at = now
            self._last_frame_at = now

    def stage(self, name: str, ms: float) -> None:
        with self._lock:
            self._stage_samples[name].append(ms)

    def clip_emitted(self) -> None:
        with self._lock:
            self.clips_emitted += 1

    def clip_latency(self, clip_index: int, buffer_fill_ms: float, inference_ms: float) -> None:
        with self._lock:
            self._clip_latencies.append(ClipLatency(clip_index, buffer_fill_ms, inference_ms))

    def sample_classified(self, n: int = 1) -> None:
        with self._lock:
            self.samples_classified += n

    def classifier_error(self) -> None:
        with self._lock:
            self.classifier_errors += 1

    def alert(self, level: str) -> None:
        with self._lock:
            self.alerts_by_level[level] = self.alerts_by_level.get(level, 0) + 1

    def snapshot(self) -> MetricsSnapshot:
        with self._lock:
            stage_stats = {}
            for name in STAGES:
                vals = self._stage_samples[name]
                mean = sum(vals) / len(vals) if vals else 0.0
                stage_stats[name] = StageStats(mean, nearest_rank_p95(vals), len(vals))
            lats = list(self._clip_latencies)
            fills = [c.buffer_fill_ms for c in lats]
            infs = [c.inference_ms for c in lats]
            e2es = [c.end_to_end_ms for c in lats]
            if self._first_frame_at is not None and self._last_frame_at is not None:
                span = self._last_frame_at - self._first_frame_at
                efps = self.frames_processed / span if span > 0 else float(self.frames_processed)
            else:
                efps = 0.0
            depths = {}
            if self.queue_depth_probe is not None:
                try:
                    depths = dict(self.queue_depth_probe())
                except Exception:
                    depths = {}
            return MetricsSnapshot(
                efps=efps,
                stage_stats=stage_stats,
                end_to_end_ms_mean=sum(e2es) / len(e2es) if e2es else 0.0,
                buffer_fill_ms_mean=sum(fills) / len(fills) if fills else 0.0,
                inference_ms_mean=sum(infs) / len(infs) if infs else 0.0,
                clip_latencies=tuple(lats),
                queue_depths=depths,
                frames_in=self.frames_in,
                frames_processed=self.frames_processed,
                frames_dropped=self.frames_dropped,
                clips_emitted=self.clips_emitted,
                samples_classified=self.samples_classified,
                classifier_errors=self.classifier_errors,
                alerts_by_level=dict(self.alerts_by_level),
                elapsed_s=time.monotonic() - self._started,
            )
