"""Per-track skeleton buffering and interaction pairing.

Each tracked person owns a sliding window of COCO-17 poses.  A window
emits a clip once it holds clip_len frames and at least clip_stride new
frames arrived since the previous emission; detection gaps inside the
loss horizon just slow accumulation down (no placeholder frames are
invented).  Clips that co-emit on the same pipeline tick are combined
into two-person candidate samples by centroid proximity, and every clip
additionally yields a zero-padded single-person sample.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry.layouts import CENTROID_JOINTS


@dataclass(frozen=True)
class AssemblyConfig:
    clip_len: int = 100
    clip_stride: int = 30
    loss_horizon: int = 60
    pair_distance: float = 0.0  # pixels; 0 disables distance gating
    max_persons: int = 100
    centroid_conf: float = 0.3

    def __post_init__(self):
        if not self.clip_len > self.clip_stride > 0:
            raise ValueError("need clip_len > clip_stride > 0")
        if self.max_persons < 1:
            raise ValueError("max_persons must be >= 1")


def centroid(pose: np.ndarray, conf_floor: float = 0.3):
    """Skeleton centroid from shoulders + hips (COCO 5, 6, 11, 12).

    Mean (x, y) over the subset passing the confidence filter; None when
    none passes.
    """
    joints = pose[list(CENTROID_JOINTS)]
    ok = joints[:, 3] >= conf_floor
    if not ok.any():
        return None
    pts = joints[ok][:, :2]
    return (float(pts[:, 0].mean()), float(pts[:, 1].mean()))


@dataclass
class EmittedClip:
    """A full window emitted by one buffer at one pipeline tick."""

    track_id: int
    frame_indices: list[int]
    poses: np.ndarray  # (clip_len, 17, 4)
    emit_frame: int

    @property
    def frame_span(self) -> tuple[int, int]:
        return (self.frame_indices[0], self.frame_indices[-1])


@dataclass(frozen=True)
class ClipSample:
    """One- or two-person sample routed to classification.

    persons always carries two slots; the absent slot is identically zero
    (coordinates and confidences).
    """

    persons: np.ndarray  # (2, clip_len, 17, 4)
    track_ids: tuple[int, ...]
    frame_span: tuple[int, int]


class SkeletonBuffer:
    """Sliding pose window for one track."""

    def __init__(self, track_id: int, clip_len: int):
        self.track_id = track_id
        self.frames: deque[tuple[int, np.ndarray]] = deque(maxlen=clip_len)
        self.appended_since_emit = 0
        self.missing_streak = 0
        self.has_emitted = False

    def append(self, frame_index: int, pose: np.ndarray) -> None:
        if self.frames and frame_index <= self.frames[-1][0]:
            raise ValueError(
                f"frame index {frame_index} not after {self.frames[-1][0]} "
                f"(track {self.track_id})"
            )
        self.frames.append((frame_index, np.asarray(pose, dtype=np.float64)))
        self.appended_since_emit += 1
        self.missing_streak = 0


@dataclass
class BufferManager:
    """Owns all skeleton buffers for one stream (single-writer)."""

    cfg: AssemblyConfig = field(default_factory=AssemblyConfig)

    def __post_init__(self):
        self.buffers: dict[int, SkeletonBuffer] = {}

    def ingest_frame(self, matches, frame: int) -> list[EmittedClip]:
        """Feed this tick's (track_id, detection) matches; returns clips that
        became emission-eligible.

        New buffers are only opened while the max_persons cap holds; excess
        candidates are dropped lowest-score-first.
        """
        cfg = self.cfg
        accepted = []
        new_candidates = []
        for track_id, det in matches:
            if track_id in self.buffers:
                accepted.append((track_id, det))
            else:
                new_candidates.append((track_id, det))
        headroom = cfg.max_persons - len(self.buffers)
        if headroom < len(new_candidates):
            new_candidates.sort(key=lambda pair: (-pair[1].score, pair[0]))
            new_candidates = new_candidates[:max(headroom, 0)]
        for track_id, det in new_candidates:
            self.buffers[track_id] = SkeletonBuffer(track_id, cfg.clip_len)
            accepted.append((track_id, det))

        matched_ids = set()
        for track_id, det in accepted:
            self.buffers[track_id].append(frame, det.pose)
            matched_ids.add(track_id)
        for track_id, buf in self.buffers.items():
            if track_id not in matched_ids:
                buf.missing_streak += 1

        emitted: list[EmittedClip] = []
        for track_id in sorted(matched_ids):
            buf = self.buffers[track_id]
            if len(buf.frames) < cfg.clip_len:
                continue
            if buf.has_emitted and buf.appended_since_emit < cfg.clip_stride:
                continue
            indices = [fi for fi, _ in buf.frames]
            poses = np.stack([p for _, p in buf.frames])
            emitted.append(EmittedClip(track_id, indices, poses, emit_frame=frame))
            buf.appended_since_emit = 0
            buf.has_emitted = True
        return emitted

    def prune_lost(self, frame: int) -> list[int]:
        """Discard buffers missing for more than loss_horizon frames; their
        partial windows are never emitted."""
        removed = [
            tid for tid, buf in self.buffers.items()
            if buf.missing_streak > self.cfg.loss_horizon
        ]
        for tid in removed:
            del self.buffers[tid]
        return sorted(removed)


def _median_centroid_distance(a: EmittedClip, b: EmittedClip, conf_floor: float) -> float:
    """Median per-frame centroid distance over positions where both clips
    have a centroid; inf when they never coexist."""
    dists = []
    for pa, pb in zip(a.poses, b.poses):
        ca = centroid(pa, conf_floor)
        cb = centroid(pb, conf_floor)
        if ca is None or cb is None:
            continue
        dists.append(float(np.hypot(ca[0] - cb[0], ca[1] - cb[1])))
    if not dists:
        return float("inf")
    return float(np.median(dists))


def make_samples(emitted: list[EmittedClip], cfg: AssemblyConfig) -> list[ClipSample]:
    """Pair co-emitted clips by proximity and retain zero-padded singles.

    With gating off (pair_distance == 0) every 2-combination is kept, so k
    clips yield C(k, 2) + k samples.  Slot order within a pair follows
    ascending track_id.
    """
    clips = sorted(emitted, key=lambda c: c.track_id)
    samples: list[ClipSample] = []

    for a, b in itertools.combinations(clips, 2):
        if cfg.pair_distance > 0.0:
            dist = _median_centroid_distance(a, b, cfg.centroid_conf)
            if dist > cfg.pair_distance:
                continue
        persons = np.stack([a.poses, b.poses])
        span = (min(a.frame_span[0], b.frame_span[0]), max(a.frame_span[1], b.frame_span[1]))
        samples.append(ClipSample(persons, (a.track_id, b.track_id), span))

    for clip in clips:
        persons = np.stack([clip.poses, np.zeros_like(clip.poses)])
        samples.append(ClipSample(persons, (clip.track_id,), clip.frame_span))

    return samples
