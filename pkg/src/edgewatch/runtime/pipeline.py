"""Producer-consumer analysis pipeline.

One producer thread reads the source and feeds a bounded analysis queue:
blocking puts in replay mode (backpressure, deterministic), drop-oldest in
live mode (acquisition never stalls).  The consumer owns tracker, buffers
and the overlay ring; classification batches optionally run on a small
thread pool with results re-ordered by emission index, so alert order is
independent of worker scheduling.

Latency decomposition per emitted clip: buffer_fill spans the ingest of
the window's first frame to emission; inference spans preprocess through
risk aggregation; end_to_end is their sum by construction.
"""

from __future__ import annotations

import heapq
import logging
import queue
import tempfile
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..assembly import AssemblyConfig, BufferManager, make_samples
from ..geometry.lifting import LifterHandle, LifterUnavailableError
from ..geometry.remap import remap_sample
from ..preprocess import (
    DegenerateSampleError,
    NtuSample,
    format_gcn_input,
    pre_normalize_3d,
    uniform_sample_decode,
)
from ..risk import (
    ClassifierHandle,
    ClassifierUnavailableError,
    RiskConfig,
    RiskLevel,
    aggregate_risk,
    classify,
)
from ..tracking import Tracker, TrackerConfig, filter_detections
from .clips import FrameRing, capture_alert_clip
from .metrics import MetricsAccumulator, MetricsSnapshot
from .overlay import render_overlay
from .sources import FrameSource

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    assembly: AssemblyConfig = field(default_factory=AssemblyConfig)
    risk: RiskConfig = field(default_factory=RiskConfig)
    classifier: ClassifierHandle = field(default_factory=ClassifierHandle)
    lifter: LifterHandle = field(default_factory=LifterHandle)
    queue_capacity: int = 64
    live_mode: bool = False     # drop-oldest on the analysis queue
    paced: bool = False         # deliver frames at source pace
    overlay_enabled: bool = True
    overlay_size: tuple[int, int] = (640, 480)
    alert_pre_s: float = 3.0
    alert_post_s: float = 2.0
    alert_cooldown_s: float = 5.0
    alert_dir: str | None = None
    ring_capacity: int = 600
    classify_workers: int = 0   # 0 = classify inline on the consumer
    stats_interval_s: float = 1.0
    nominal_fps: float | None = None

    def __post_init__(self):
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")


class PipelineSinks:
    """Override any subset; defaults are no-ops.

    on_frame carries encoded overlay PNGs (lossy fan-out downstream);
    on_event carries status/stats/clip dicts (lossless downstream);
    on_alert fires after the clip and thumbnail files are on disk.
    """

    def on_frame(self, png: bytes) -> None:
        pass

    def on_event(self, event: dict) -> None:
        pass

    def on_alert(self, alert: dict) -> None:
        pass


@dataclass(frozen=True)
class SessionReport:
    snapshot: MetricsSnapshot
    alerts: tuple[dict, ...]
    source_descriptor: str
    stopped_early: bool
    suppressed_alerts: int
    degenerate_samples: int

    def core(self) -> dict:
        """Deterministic subset: equal across runs of the same replay in
        backpressure mode (wall-clock timings and file paths excluded)."""
        return {
            "source": self.source_descriptor,
            "frames_in": self.snapshot.frames_in,
            "frames_processed": self.snapshot.frames_processed,
            "frames_dropped": self.snapshot.frames_dropped,
            "clips_emitted": self.snapshot.clips_emitted,
            "samples_classified": self.snapshot.samples_classified,
            "classifier_errors": self.snapshot.classifier_errors,
            "alerts_by_level": dict(self.snapshot.alerts_by_level),
            "suppressed_alerts": self.suppressed_alerts,
            "degenerate_samples": self.degenerate_samples,
            "alerts": [
                {
                    "level": a["level"],
                    "created_ts_ms": a["created_ts_ms"],
                    "frame_span": list(a["frame_span"]),
                    "track_ids": list(a["track_ids"]),
                    "danger_mass": round(a["extra"]["danger_mass"], 6),
                    "warning_mass": round(a["extra"]["warning_mass"], 6),
                    "top_label": a["extra"]["top_label"],
                }
                for a in self.alerts
            ],
        }


@dataclass
class _Pending:
    capture_span: tuple[int, int]
    level: str
    summary: str
    track_ids: tuple[int, ...]
    frame_span: tuple[int, int]
    created_ts_ms: int
    extra: dict


def _prepare_samples(samples, cfg: PipelineConfig):
    """Remap + normalize + resample each ClipSample; None marks a sample
    dropped as degenerate or lost to a lifter failure."""
    prepared: list[NtuSample | None] = []
    degenerate = 0
    lifter_errors = 0
    for s in samples:
        try:
            ntu = remap_sample(s.persons, cfg.lifter)
            stacked = np.concatenate([ntu[..., :3], ntu[..., 3:4]], axis=-1)
            ns = NtuSample.from_persons(stacked)
            ns = pre_normalize_3d(ns)
            ns = uniform_sample_decode(ns)
        except DegenerateSampleError:
            degenerate += 1
            prepared.append(None)
            continue
        except LifterUnavailableError as exc:
            log.warning("lifter failed, sample skipped: %s", exc)
            lifter_errors += 1
            prepared.append(None)
            continue
        prepared.append(ns)
    return prepared, degenerate, lifter_errors


def _run_batch(samples, cfg: PipelineConfig) -> dict:
    t0 = time.perf_counter()
    prepared, degenerate, errors = _prepare_samples(samples, cfg)
    live = [ns for ns in prepared if ns is not None]
    tensor = format_gcn_input(live)
    t1 = time.perf_counter()

    assessments: list = [None] * len(samples)
    try:
        probs = classify(tensor, cfg.classifier)
    except ClassifierUnavailableError as exc:
        log.warning("classifier failed, batch skipped: %s", exc)
        errors += 1
        probs = None
    t2 = time.perf_counter()

    classified = 0
    if probs is not None:
        it = iter(probs)
        for i, (s, ns) in enumerate(zip(samples, prepared)):
            if ns is None:
                continue
            assessments[i] = aggregate_risk(
                next(it), cfg.risk, track_ids=s.track_ids, frame_span=s.frame_span
            )
            classified += 1
    return {
        "assessments": assessments,
        "samples": samples,
        "preprocess_ms": (t1 - t0) * 1e3,
        "classify_ms": (t2 - t1) * 1e3,
        "degenerate": degenerate,
        "errors": errors,
        "classified": classified,
    }


def run_pipeline(
    source: FrameSource,
    cfg: PipelineConfig,
    sinks: PipelineSinks | None = None,
    stop_event: threading.Event | None = None,
) -> SessionReport:
    sinks = sinks or PipelineSinks()
    stop_event = stop_event or threading.Event()
    metrics = MetricsAccumulator()
    analysis_q: queue.Queue = queue.Queue(maxsize=cfg.queue_capacity)
    metrics.queue_depth_probe = lambda: {"analysis": analysis_q.qsize()}
    fps = cfg.nominal_fps or source.nominal_fps or 30.0
    alert_dir = Path(cfg.alert_dir or tempfile.mkdtemp(prefix="edgewatch-alerts-"))
    nonce = uuid.uuid4().hex[:8]

    _SENTINEL = object()

    def produce():
        try:
            for pf in source.frames(paced=cfg.paced):
                if stop_event.is_set():
                    break
                metrics.frame_in()
                if cfg.live_mode:
                    while True:
                        try:
                            analysis_q.put_nowait(pf)
                            break
                        except queue.Full:
                            try:
                                analysis_q.get_nowait()
                                metrics.frame_dropped()
                            except queue.Empty:
                                continue
                else:
                    queued = False
                    while not stop_event.is_set():
                        try:
                            analysis_q.put(pf, timeout=0.1)
                            queued = True
                            break
                        except queue.Full:
                            continue
                    if not queued:
                        # counted on ingest but never reached the queue
                        metrics.frame_dropped()
        finally:
            while True:
                try:
                    analysis_q.put(_SENTINEL, timeout=0.2)
                    break
                except queue.Full:
                    try:
                        analysis_q.get_nowait()
                        metrics.frame_dropped()
                    except queue.Empty:
                        continue

    tracker = Tracker(cfg.tracker)
    manager = BufferManager(cfg.assembly)
    ring = FrameRing(cfg.ring_capacity)
    ingest_walls: dict[int, float] = {}
    track_labels: dict[int, str] = {}
    cooldown_at: dict[frozenset, int] = {}
    pendings: list[_Pending] = []
    alerts: list[dict] = []
    suppressed = 0
    degenerate_total = 0
    alert_seq = 0
    last_stats_ts: int | None = None
    last_ts_ms = 0
    stopped_early = False

    executor = (
        ThreadPoolExecutor(max_workers=cfg.classify_workers)
        if cfg.classify_workers > 0 else None
    )
    # (batch_index, future-or-result) ordered; results handled in index order
    result_heap: list = []
    next_batch = 0
    batch_seq = 0

    pre_frames = int(round(cfg.alert_pre_s * fps))
    post_frames = int(round(cfg.alert_post_s * fps))
    cooldown_ms = int(cfg.alert_cooldown_s * 1000)

    def handle_result(res: dict, clip_fills: list[tuple[int, float]], ts_ms: int):
        nonlocal suppressed, degenerate_total, alert_seq
        metrics.stage("preprocess", res["preprocess_ms"])
        metrics.stage("classify", res["classify_ms"])
        metrics.sample_classified(res["classified"])
        for _ in range(res["errors"]):
            metrics.classifier_error()
        degenerate_total += res["degenerate"]
        inference_ms = res["preprocess_ms"] + res["classify_ms"]
        for clip_index, fill_ms in clip_fills:
            metrics.clip_latency(clip_index, fill_ms, inference_ms)

        for assessment in res["assessments"]:
            if assessment is None:
                continue
            level = assessment.level.value
            for tid in assessment.track_ids:
                track_labels[tid] = level
            ring.mark_risk(*assessment.frame_span, assessment.danger_mass)
            if assessment.level is RiskLevel.SAFE:
                sinks.on_event({
                    "type": "status",
                    "level": level,
                    "ts_ms": ts_ms,
                    "track_ids": list(assessment.track_ids),
                    "top_label": assessment.top_label,
                })
                continue
            key = frozenset(assessment.track_ids)
            last = cooldown_at.get(key)
            if last is not None and ts_ms - last < cooldown_ms:
                suppressed += 1
                continue
            cooldown_at[key] = ts_ms
            emit_frame = assessment.frame_span[1]
            pendings.append(_Pending(
                capture_span=(max(0, emit_frame - pre_frames), emit_frame + post_frames),
                level=level,
                summary=(
                    f"{level}: {assessment.top_label} p={assessment.top_prob:.2f} "
                    f"danger={assessment.danger_mass:.2f} "
                    f"warning={assessment.warning_mass:.2f} "
                    f"tracks={','.join(str(t) for t in assessment.track_ids)}"
                ),
                track_ids=assessment.track_ids,
                frame_span=assessment.frame_span,
                created_ts_ms=ts_ms,
                extra={
                    "danger_mass": assessment.danger_mass,
                    "warning_mass": assessment.warning_mass,
                    "top_label": assessment.top_label,
                    "top_prob": assessment.top_prob,
                },
            ))

    def finalize_pendings(current_frame: int | None):
        nonlocal alert_seq
        remaining = []
        for p in pendings:
            if current_frame is not None and current_frame < p.capture_span[1]:
                remaining.append(p)
                continue
            basename = f"alert-{nonce}-{alert_seq:04d}-{p.level.lower()}"
            alert_seq += 1
            try:
                clip_path, thumb_path, truncated = capture_alert_clip(
                    ring, p.capture_span, alert_dir, basename,
                    context={
                        "level": p.level,
                        "summary": p.summary,
                        "track_ids": list(p.track_ids),
                        "assessment_span": list(p.frame_span),
                    },
                )
            except ValueError as exc:
                log.warning("alert capture failed: %s", exc)
                continue
            record = {
                "level": p.level,
                "summary": p.summary,
                "clip_path": str(clip_path),
                "thumbnail_path": str(thumb_path),
                "frame_span": list(p.frame_span),
                "track_ids": list(p.track_ids),
                "created_ts_ms": p.created_ts_ms,
                "truncated": truncated,
                "extra": dict(p.extra),
            }
            alerts.append(record)
            metrics.alert(p.level)
            sinks.on_alert(record)
        pendings[:] = remaining

    def flush_ready(current_frame: int | None, wait: bool):
        nonlocal next_batch
        while result_heap and result_heap[0][0] == next_batch:
            idx, fut, clip_fills, ts_ms = result_heap[0]
            if executor is not None:
                if not wait and not fut.done():
                    break
                res = fut.result()
            else:
                res = fut
            heapq.heappop(result_heap)
            handle_result(res, clip_fills, ts_ms)
            next_batch += 1

    def handle_frame(pf):
        nonlocal batch_seq, last_stats_ts, last_ts_ms
        t_start = time.perf_counter()
        ingest_walls[pf.frame_index] = t_start
        last_ts_ms = pf.timestamp_ms

        dets = filter_detections(list(pf.detections), cfg.tracker)
        matches = tracker.step(dets, pf.frame_index)
        t_track = time.perf_counter()

        emitted = manager.ingest_frame(matches, pf.frame_index)
        manager.prune_lost(pf.frame_index)
        samples = make_samples(emitted, cfg.assembly) if emitted else []
        t_asm = time.perf_counter()
        metrics.stage("track", (t_track - t_start) * 1e3)
        metrics.stage("assemble", (t_asm - t_track) * 1e3)

        # The ring must always hold frames or alert clips would be empty;
        # disabling the overlay skips skeleton drawing and broadcast only.
        shown = matches if cfg.overlay_enabled else []
        png = render_overlay(pf, shown, track_labels, size=cfg.overlay_size)
        ring.push(pf.frame_index, pf.timestamp_ms, png)
        if cfg.overlay_enabled:
            sinks.on_frame(png)
        metrics.frame_processed()

        if emitted:
            clip_fills = []
            for clip in emitted:
                metrics.clip_emitted()
                first_wall = ingest_walls.get(clip.frame_indices[0], t_start)
                clip_fills.append((batch_seq, (t_asm - first_wall) * 1e3))
            sinks.on_event({
                "type": "clip",
                "frame": pf.frame_index,
                "ts_ms": pf.timestamp_ms,
                "count": len(emitted),
                "track_ids": [c.track_id for c in emitted],
            })
            if executor is not None:
                fut = executor.submit(_run_batch, samples, cfg)
                heapq.heappush(result_heap, (batch_seq, fut, clip_fills, pf.timestamp_ms))
            else:
                res = _run_batch(samples, cfg)
                heapq.heappush(result_heap, (batch_seq, res, clip_fills, pf.timestamp_ms))
            batch_seq += 1

        flush_ready(pf.frame_index, wait=False)
        finalize_pendings(pf.frame_index)

        horizon = pf.frame_index - 2 * cfg.assembly.clip_len
        for idx in [i for i in ingest_walls if i < horizon]:
            del ingest_walls[idx]

        if last_stats_ts is None or pf.timestamp_ms - last_stats_ts >= cfg.stats_interval_s * 1000:
            last_stats_ts = pf.timestamp_ms
            sinks.on_event({"type": "stats", "snapshot": metrics.snapshot().as_dict()})

    producer = threading.Thread(target=produce, name="edgewatch-producer", daemon=True)
    producer.start()

    draining = False
    while True:
        try:
            item = analysis_q.get(timeout=0.1)
        except queue.Empty:
            if stop_event.is_set() and not draining:
                stopped_early = True
                draining = True
            continue
        if item is _SENTINEL:
            break
        if stop_event.is_set():
            stopped_early = True
            draining = True
        if draining:
            metrics.frame_dropped()
            continue
        handle_frame(item)

    producer.join(timeout=5.0)
    flush_ready(None, wait=True)
    if executor is not None:
        executor.shutdown(wait=True)
    finalize_pendings(None)
    final = metrics.snapshot()
    sinks.on_event({"type": "stats", "snapshot": final.as_dict(), "final": True})

    return SessionReport(
        snapshot=final,
        alerts=tuple(alerts),
        source_descriptor=source.descriptor,
        stopped_early=stopped_early,
        suppressed_alerts=suppressed,
        degenerate_samples=degenerate_total,
    )
