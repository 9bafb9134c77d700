"""The per-session semantic monitoring loop.

Chunks fire on stream time: boundary i sits at first_ts + (i+1) *
chunk_duration.  When a boundary passes, the previous chunk's verdict is
collected (its summary becomes the one-step memory), the new chunk is
sampled from the frame history and dispatched.  Inference for chunk i
thus overlaps frame accumulation for chunk i+1, which is what the dual
endpoint split is for.  Verdicts are handled strictly in chunk order.
"""

from __future__ import annotations

import logging
import tempfile
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..runtime.clips import FrameRing, capture_alert_clip
from ..runtime.metrics import MetricsAccumulator, MetricsSnapshot
from ..runtime.overlay import render_overlay
from ..runtime.pipeline import PipelineSinks
from ..runtime.sources import FrameSource
from .client import ParseMode, VlmVerdict, infer_chunk, pick_endpoint
from .config import VlmConfig
from .prompts import build_prompt
from .sampling import InsufficientHistoryError, StampedFrame, sample_chunk

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VlmSessionReport:
    snapshot: MetricsSnapshot
    alerts: tuple[dict, ...]
    source_descriptor: str
    chunks_dispatched: int
    deferred_chunks: int
    verdicts_by_level: dict[str, int]
    structured_verdicts: int
    fallback_verdicts: int
    transport_errors: int
    stopped_early: bool

    def core(self) -> dict:
        return {
            "source": self.source_descriptor,
            "frames_in": self.snapshot.frames_in,
            "chunks_dispatched": self.chunks_dispatched,
            "deferred_chunks": self.deferred_chunks,
            "verdicts_by_level": dict(self.verdicts_by_level),
            "structured_verdicts": self.structured_verdicts,
            "fallback_verdicts": self.fallback_verdicts,
            "transport_errors": self.transport_errors,
            "alerts": [
                {
                    "level": a["level"],
                    "created_ts_ms": a["created_ts_ms"],
                    "chunk_index": a["extra"]["chunk_index"],
                }
                for a in self.alerts
            ],
        }


@dataclass
class _PendingVlm:
    end_ts_ms: int
    start_ts_ms: int
    verdict: VlmVerdict
    created_ts_ms: int


def run_vlm_session(
    source: FrameSource,
    cfg: VlmConfig,
    sinks: PipelineSinks | None = None,
    stop_event: threading.Event | None = None,
    *,
    paced: bool = False,
    overlay_size: tuple[int, int] = (640, 480),
    alert_dir: str | None = None,
    alert_pre_s: float = 3.0,
    alert_post_s: float = 2.0,
    transport_for=None,
) -> VlmSessionReport:
    """Drive the semantic loop over a pose-frame source.

    Replay sources carry no raw video, so each frame is rendered to a
    skeleton image first; a camera build would feed decoded frames
    through the same history ring.  transport_for(endpoint) may return an
    httpx transport override (in-process test servers).
    """
    sinks = sinks or PipelineSinks()
    stop_event = stop_event or threading.Event()
    metrics = MetricsAccumulator()
    out_dir = Path(alert_dir or tempfile.mkdtemp(prefix="edgewatch-vlm-alerts-"))
    ring = FrameRing(capacity=1200)
    history: deque[StampedFrame] = deque()
    executor = ThreadPoolExecutor(max_workers=2 if cfg.dual_server_mode else 1)

    chunk_ms = cfg.chunk_duration_sec * 1000.0
    keep_ms = (cfg.history_max_sec + cfg.chunk_duration_sec) * 1000.0
    pre_ms = int(alert_pre_s * 1000)
    post_ms = int(alert_post_s * 1000)

    first_ts: int | None = None
    next_boundary: float | None = None
    chunk_index = 0
    deferred = 0
    dispatched = 0
    prev_summary: str | None = None
    in_flight = None  # (chunk_index, future, dispatch_t0)
    verdicts_by_level = {"SAFE": 0, "WARNING": 0, "DANGER": 0}
    structured = 0
    fallback = 0
    transport_errors = 0
    alerts: list[dict] = []
    pendings: list[_PendingVlm] = []
    alert_seq = 0
    stopped_early = False

    def handle_verdict(verdict: VlmVerdict, inference_ms: float, boundary_ts: int):
        nonlocal prev_summary, structured, fallback, transport_errors
        metrics.stage("classify", inference_ms)
        verdicts_by_level[verdict.level] = verdicts_by_level.get(verdict.level, 0) + 1
        if verdict.transport_error:
            transport_errors += 1
            metrics.classifier_error()
        elif verdict.parse_mode is ParseMode.STRUCTURED:
            structured += 1
            metrics.sample_classified()
        else:
            fallback += 1
            metrics.sample_classified()
        prev_summary = verdict.summary

        if verdict.level == "SAFE":
            sinks.on_event({
                "type": "status",
                "level": "SAFE",
                "ts_ms": boundary_ts,
                "summary": verdict.summary,
                "chunk_index": verdict.chunk_index,
            })
            return
        span_start = int(boundary_ts - chunk_ms)
        pendings.append(_PendingVlm(
            end_ts_ms=boundary_ts + post_ms,
            start_ts_ms=span_start - pre_ms,
            verdict=verdict,
            created_ts_ms=boundary_ts,
        ))

    def finalize_pendings(current_ts: int | None):
        nonlocal alert_seq
        remaining = []
        for p in pendings:
            if current_ts is not None and current_ts < p.end_ts_ms:
                remaining.append(p)
                continue
            span = ring.span_for_ts(p.start_ts_ms, p.end_ts_ms)
            if span is None:
                log.warning("vlm alert capture skipped: ring empty for span")
                continue
            peak = ring.index_nearest_ts(p.created_ts_ms)
            if peak is not None:
                ring.mark_risk(peak, peak, 1.0)
            basename = f"vlm-alert-{p.created_ts_ms}-{alert_seq:04d}-{p.verdict.level.lower()}"
            alert_seq += 1
            clip_path, thumb_path, truncated = capture_alert_clip(
                ring, span, out_dir, basename,
                context={
                    "level": p.verdict.level,
                    "summary": p.verdict.summary,
                    "chunk_index": p.verdict.chunk_index,
                    "parse_mode": p.verdict.parse_mode.value,
                },
            )
            record = {
                "level": p.verdict.level,
                "summary": p.verdict.summary,
                "clip_path": str(clip_path),
                "thumbnail_path": str(thumb_path),
                "frame_span": list(span),
                "track_ids": [],
                "created_ts_ms": p.created_ts_ms,
                "truncated": truncated,
                "extra": {
                    "parse_mode": p.verdict.parse_mode.value,
                    "chunk_index": p.verdict.chunk_index,
                },
            }
            alerts.append(record)
            metrics.alert(p.verdict.level)
            sinks.on_alert(record)
        pendings[:] = remaining

    def collect_in_flight():
        nonlocal in_flight
        if in_flight is None:
            return
        idx, fut, boundary_ts, t0 = in_flight
        verdict = fut.result()
        handle_verdict(verdict, (time.perf_counter() - t0) * 1e3, boundary_ts)
        in_flight = None

    def dispatch(boundary_ts: int):
        nonlocal chunk_index, deferred, dispatched, in_flight
        try:
            chunk = sample_chunk(list(history), boundary_ts, chunk_index, cfg)
        except InsufficientHistoryError:
            deferred += 1
            return
        payload = build_prompt(chunk, prev_summary if cfg.memory_loop else None, cfg)
        endpoint = pick_endpoint(chunk_index, cfg)
        transport = transport_for(endpoint) if transport_for else None
        t0 = time.perf_counter()
        fut = executor.submit(infer_chunk, payload, cfg, transport)
        in_flight = (chunk_index, fut, boundary_ts, t0)
        chunk_index += 1
        dispatched += 1
        metrics.clip_emitted()

    last_stats_ts: int | None = None
    for pf in source.frames(paced=paced):
        if stop_event.is_set():
            stopped_early = True
            break
        metrics.frame_in()
        png = render_overlay(
            pf, list(enumerate(pf.detections, start=1)), {}, size=overlay_size
        )
        history.append(StampedFrame(pf.timestamp_ms, png))
        ring.push(pf.frame_index, pf.timestamp_ms, png)
        sinks.on_frame(png)
        metrics.frame_processed()

        if first_ts is None:
            first_ts = pf.timestamp_ms
            next_boundary = first_ts + chunk_ms
        while pf.timestamp_ms >= next_boundary:
            collect_in_flight()
            dispatch(int(next_boundary))
            next_boundary += chunk_ms

        while history and history[0].timestamp_ms < pf.timestamp_ms - keep_ms:
            history.popleft()
        finalize_pendings(pf.timestamp_ms)
        if last_stats_ts is None or pf.timestamp_ms - last_stats_ts >= 1000:
            last_stats_ts = pf.timestamp_ms
            sinks.on_event({"type": "stats", "snapshot": metrics.snapshot().as_dict()})

    collect_in_flight()
    executor.shutdown(wait=True)
    finalize_pendings(None)
    final = metrics.snapshot()
    sinks.on_event({"type": "stats", "snapshot": final.as_dict(), "final": True})
    return VlmSessionReport(
        snapshot=final,
        alerts=tuple(alerts),
        source_descriptor=source.descriptor,
        chunks_dispatched=dispatched,
        deferred_chunks=deferred,
        verdicts_by_level=verdicts_by_level,
        structured_verdicts=structured,
        fallback_verdicts=fallback,
        transport_errors=transport_errors,
        stopped_early=stopped_early,
    )
