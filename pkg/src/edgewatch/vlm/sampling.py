"""Dual-stream frame sampling and the resize policy.

A chunk carries two frame sets sampled from the timestamped history:

* action frames: the dense stream, recent_fps over [now - chunk, now];
* context frames: the sparse stream, history_fps over the disjoint
  window [now - history_max, now - chunk).

Each grid point picks the history frame with the nearest timestamp (ties
to the earlier frame), so any source rate >= recent_fps satisfies the
exact frame budget.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from PIL import Image

from .config import VlmConfig


class InsufficientHistoryError(RuntimeError):
    """History shorter than one chunk; the chunk must be deferred."""


@dataclass(frozen=True)
class StampedFrame:
    timestamp_ms: int
    png: bytes


@dataclass(frozen=True)
class ChunkSample:
    chunk_index: int
    time_span: tuple[int, int]       # [now - chunk_duration, now] in ms
    action_frames: tuple[bytes, ...]
    context_frames: tuple[bytes, ...]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def resize_policy(w: int, h: int, cfg: VlmConfig) -> tuple[int, int]:
    """Two-step bound rule: cap the max dimension at target_max_dim; if
    that pushes the min dimension under min_dim, scale to min_dim = exact
    instead.  Images already within the max bound are never upscaled.
    """
    if w <= 0 or h <= 0:
        raise ValueError(f"invalid image size {w}x{h}")
    if max(w, h) <= cfg.target_max_dim:
        return (w, h)
    scale = cfg.target_max_dim / max(w, h)
    if min(w, h) * scale < cfg.min_dim:
        scale = cfg.min_dim / min(w, h)
        if scale >= 1.0:
            return (w, h)  # min-dim rescue would upscale; keep original
    return (_round_half_up(w * scale), _round_half_up(h * scale))


def resize_png(png: bytes, cfg: VlmConfig) -> bytes:
    img = Image.open(io.BytesIO(png))
    target = resize_policy(img.width, img.height, cfg)
    if target == (img.width, img.height):
        return png
    out = io.BytesIO()
    img.resize(target, Image.BILINEAR).save(out, format="PNG")
    return out.getvalue()


def _nearest(history: list[StampedFrame], target_ms: float) -> StampedFrame:
    best = history[0]
    best_d = abs(best.timestamp_ms - target_ms)
    for f in history[1:]:
        d = abs(f.timestamp_ms - target_ms)
        if d < best_d:  # strict: ties keep the earlier frame
            best, best_d = f, d
    return best


def sample_chunk(
    history: list[StampedFrame],
    now_ms: int,
    chunk_index: int,
    cfg: VlmConfig,
) -> ChunkSample:
    """Sample one chunk ending at now_ms.  History must be timestamp-sorted."""
    if not history:
        raise InsufficientHistoryError("empty frame history")
    earliest = history[0].timestamp_ms
    chunk_ms = cfg.chunk_duration_sec * 1000.0
    if now_ms - earliest < chunk_ms:
        raise InsufficientHistoryError(
            f"history covers {now_ms - earliest} ms < chunk {chunk_ms:.0f} ms"
        )

    n_action = cfg.action_frames_per_chunk
    frame_step = 1000.0 / cfg.recent_fps
    action = []
    for k in range(n_action):
        t = now_ms - (n_action - 1 - k) * frame_step
        action.append(resize_png(_nearest(history, t).png, cfg))

    context = []
    context_step = 1000.0 / cfg.history_fps
    for k in range(1, cfg.max_context_frames + 1):
        t = now_ms - chunk_ms - k * context_step
        if t < earliest:
            break
        context.append(resize_png(_nearest(history, t).png, cfg))
    context.reverse()  # oldest first

    return ChunkSample(
        chunk_index=chunk_index,
        time_span=(int(now_ms - chunk_ms), int(now_ms)),
        action_frames=tuple(action),
        context_frames=tuple(context),
    )
