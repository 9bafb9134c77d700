"""Multi-person identity tracking with two-stage IoU association.

ByteTrack-style: high-confidence detections are matched first against
all live (active + lost) tracks, then the *low*-confidence leftovers get
a second, stricter-IoU pass against whatever tracks are still unmatched.
Using the low-score boxes is what keeps identities alive through partial
occlusions instead of fragmenting them.

Tracker state is single-writer: exactly one pipeline worker may call
step() per stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class Detection:
    """One detected person: box (cx, cy, w, h) in pixels, score, COCO pose."""

    box: tuple[float, float, float, float]
    score: float
    pose: np.ndarray  # (17, 4) float64, columns (x, y, z, conf)

    @classmethod
    def from_record(cls, rec: dict) -> "Detection":
        """Build from one replay-schema detection object."""
        kpts = np.asarray(rec["kpts"], dtype=np.float64)
        if kpts.shape != (17, 3):
            raise ValueError(f"expected 17x3 kpts, got {kpts.shape}")
        pose = np.zeros((17, 4), dtype=np.float64)
        pose[:, 0] = kpts[:, 0]
        pose[:, 1] = kpts[:, 1]
        pose[:, 3] = kpts[:, 2]
        pose[pose[:, 3] <= 0.0, :3] = 0.0
        return cls(box=tuple(float(v) for v in rec["box"]), score=float(rec["score"]), pose=pose)

    def to_record(self) -> dict:
        kpts = self.pose[:, (0, 1, 3)].tolist()
        return {"box": [float(v) for v in self.box], "score": float(self.score), "kpts": kpts}


@dataclass(frozen=True)
class TrackerConfig:
    det_conf_floor: float = 0.2
    high_score_thresh: float = 0.5
    match_iou_min_high: float = 0.2
    match_iou_min_low: float = 0.5
    lost_retention_frames: int = 60
    nms_iou: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.det_conf_floor <= self.high_score_thresh <= 1.0:
            raise ValueError("need 0 <= det_conf_floor <= high_score_thresh <= 1")


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    LOST = "lost"


def iou(a, b) -> float:
    """Intersection over union of two (cx, cy, w, h) boxes."""
    ax1, ay1 = a[0] - a[2] / 2.0, a[1] - a[3] / 2.0
    ax2, ay2 = a[0] + a[2] / 2.0, a[1] + a[3] / 2.0
    bx1, by1 = b[0] - b[2] / 2.0, b[1] - b[3] / 2.0
    bx2, by2 = b[0] + b[2] / 2.0, b[1] + b[3] / 2.0
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a[2] * a[3] + b[2] * b[3] - inter
    return float(inter / union) if union > 0.0 else 0.0


def nms(detections: list[Detection], iou_thresh: float) -> list[Detection]:
    """Greedy non-maximum suppression, highest score first."""
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    keep: list[int] = []
    for i in order:
        if all(iou(detections[i].box, detections[j].box) < iou_thresh for j in keep):
            keep.append(i)
    keep.sort()
    return [detections[i] for i in keep]


def filter_detections(detections: list[Detection], cfg: TrackerConfig) -> list[Detection]:
    """Detector-side filtering expected before step(): score floor + NMS."""
    floored = [d for d in detections if d.score >= cfg.det_conf_floor]
    return nms(floored, cfg.nms_iou)


# Constant-velocity Kalman filter over (cx, cy, aspect, h); standard
# height-scaled noise for this family of trackers.
_STD_POS = 1.0 / 20.0
_STD_VEL = 1.0 / 160.0

_F = np.eye(8)
_F[:4, 4:] = np.eye(4)
_H = np.eye(4, 8)


def _kf_initiate(measurement: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = np.zeros(8)
    mean[:4] = measurement
    h = measurement[3]
    std = np.array(
        [2 * _STD_POS * h, 2 * _STD_POS * h, 1e-2, 2 * _STD_POS * h,
         10 * _STD_VEL * h, 10 * _STD_VEL * h, 1e-5, 10 * _STD_VEL * h]
    )
    return mean, np.diag(np.square(std))


def _kf_predict(mean: np.ndarray, cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = mean[3]
    std = np.array(
        [_STD_POS * h, _STD_POS * h, 1e-2, _STD_POS * h,
         _STD_VEL * h, _STD_VEL * h, 1e-5, _STD_VEL * h]
    )
    motion_cov = np.diag(np.square(std))
    return _F @ mean, _F @ cov @ _F.T + motion_cov


def _kf_update(mean: np.ndarray, cov: np.ndarray, measurement: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = mean[3]
    std = np.array([_STD_POS * h, _STD_POS * h, 1e-1, _STD_POS * h])
    innovation_cov = _H @ cov @ _H.T + np.diag(np.square(std))
    gain = np.linalg.solve(innovation_cov.T, (_H @ cov.T)).T
    innovation = measurement - _H @ mean
    new_mean = mean + gain @ innovation
    new_cov = cov - gain @ innovation_cov @ gain.T
    return new_mean, new_cov


def _to_xyah(box) -> np.ndarray:
    cx, cy, w, h = box
    return np.array([cx, cy, w / h, h], dtype=np.float64)


class TrackState:
    """One tracked identity: motion estimate, status, bookkeeping."""

    def __init__(self, track_id: int, detection: Detection, frame: int):
        self.track_id = track_id
        self.mean, self.covariance = _kf_initiate(_to_xyah(detection.box))
        self.status = TrackStatus.TENTATIVE
        self.last_seen = frame
        self.score = detection.score
        self.missing_streak = 0

    @property
    def box(self) -> tuple[float, float, float, float]:
        """Current (cx, cy, w, h) estimate."""
        cx, cy, a, h = self.mean[:4]
        return (float(cx), float(cy), float(a * h), float(h))

    def predict(self) -> None:
        self.mean, self.covariance = _kf_predict(self.mean, self.covariance)

    def update(self, detection: Detection, frame: int) -> None:
        self.mean, self.covariance = _kf_update(
            self.mean, self.covariance, _to_xyah(detection.box)
        )
        self.status = TrackStatus.ACTIVE
        self.last_seen = frame
        self.score = detection.score
        self.missing_streak = 0

    def mark_missed(self) -> None:
        self.status = TrackStatus.LOST
        self.missing_streak += 1


def _assign(tracks: list[TrackState], detections: list[Detection], iou_min: float) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Maximum-total-IoU assignment; pairs below iou_min are rejected.

    Returns (matches as (track_idx, det_idx)), unmatched track indices,
    unmatched detection indices.  Rows are in track order, columns in
    detection order, which fixes tie-breaking deterministically.
    """
    if not tracks or not detections:
        return [], list(range(len(tracks))), list(range(len(detections)))
    gain = np.zeros((len(tracks), len(detections)))
    for ti, track in enumerate(tracks):
        for di, det in enumerate(detections):
            gain[ti, di] = iou(track.box, det.box)
    rows, cols = linear_sum_assignment(-gain)
    matches = [(int(r), int(c)) for r, c in zip(rows, cols) if gain[r, c] >= iou_min and gain[r, c] > 0.0]
    matched_t = {r for r, _ in matches}
    matched_d = {c for _, c in matches}
    u_tracks = [i for i in range(len(tracks)) if i not in matched_t]
    u_dets = [i for i in range(len(detections)) if i not in matched_d]
    return matches, u_tracks, u_dets


@dataclass
class Tracker:
    """Two-stage association tracker; track ids are never reused."""

    cfg: TrackerConfig = field(default_factory=TrackerConfig)

    def __post_init__(self):
        self.tracks: list[TrackState] = []
        self._next_id = 1
        self._removed_ids: set[int] = set()

    def predict(self) -> dict[int, tuple[float, float, float, float]]:
        """Advance every live track one frame; returns predicted boxes."""
        for track in self.tracks:
            track.predict()
        return {t.track_id: t.box for t in self.tracks}

    def step(self, detections: list[Detection], frame: int) -> list[tuple[int, Detection]]:
        """Associate this frame's detections; returns (track_id, detection)
        matches including freshly spawned tracks.

        Callers must pre-filter detections (filter_detections): scores are
        assumed >= det_conf_floor and NMS-deduplicated.
        """
        self.tracks.sort(key=lambda t: t.track_id)
        self.predict()

        high = [(i, d) for i, d in enumerate(detections) if d.score >= self.cfg.high_score_thresh]
        low = [(i, d) for i, d in enumerate(detections) if d.score < self.cfg.high_score_thresh]

        out: list[tuple[int, Detection]] = []

        # stage 1: high-score detections vs every live track
        high_dets = [d for _, d in high]
        matches, u_track_idx, u_high_idx = _assign(self.tracks, high_dets, self.cfg.match_iou_min_high)
        for ti, di in matches:
            self.tracks[ti].update(high_dets[di], frame)
            out.append((self.tracks[ti].track_id, high_dets[di]))

        # stage 2: low-score detections vs remaining tracks, stricter IoU
        remaining = [self.tracks[i] for i in u_track_idx]
        low_dets = [d for _, d in low]
        matches2, u_track_idx2, _ = _assign(remaining, low_dets, self.cfg.match_iou_min_low)
        for ti, di in matches2:
            remaining[ti].update(low_dets[di], frame)
            out.append((remaining[ti].track_id, low_dets[di]))

        # unmatched tracks go (or stay) lost
        for ti in u_track_idx2:
            remaining[ti].mark_missed()

        # unmatched high-score detections spawn new tracks;
        # unmatched low-score detections are discarded
        for di in u_high_idx:
            track = TrackState(self._next_id, high_dets[di], frame)
            self._next_id += 1
            self.tracks.append(track)
            out.append((track.track_id, high_dets[di]))

        # drop tracks lost for more than the retention horizon
        survivors = []
        for track in self.tracks:
            if track.status == TrackStatus.LOST and track.missing_streak > self.cfg.lost_retention_frames:
                self._removed_ids.add(track.track_id)
            else:
                survivors.append(track)
        self.tracks = survivors

        out.sort(key=lambda pair: pair[0])
        return out
