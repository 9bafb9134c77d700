"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from edgewatch.preprocess import NtuSample
from edgewatch.runtime.scenarios import generate
from edgewatch.runtime.sources import PoseFrame, parse_replay_record
from edgewatch.tracking import Detection


def frames_from_records(records: list[dict]) -> list[PoseFrame]:
    return [parse_replay_record(rec, lineno=i + 1) for i, rec in enumerate(records)]


def scenario_frames(name: str, **params) -> list[PoseFrame]:
    return frames_from_records(generate(name, **params))


def grid_pose(cx: float, cy: float, spread: float = 40.0, conf: float = 0.9) -> np.ndarray:
    """A crude but valid 17-joint pose scattered around (cx, cy)."""
    rng = np.random.default_rng(int(cx * 7 + cy * 13) % 1000)
    pose = np.zeros((17, 4), dtype=np.float64)
    pose[:, 0] = cx + rng.uniform(-spread, spread, 17)
    pose[:, 1] = cy + rng.uniform(-spread, spread, 17)
    pose[:, 3] = conf
    return pose


def box_detection(cx: float, cy: float, w: float = 60.0, h: float = 150.0,
                  score: float = 0.9) -> Detection:
    return Detection(box=(cx, cy, w, h), score=score, pose=grid_pose(cx, cy))


def random_coco_pose(rng: np.random.Generator, missing_prob: float = 0.0) -> np.ndarray:
    pose = np.zeros((17, 4), dtype=np.float64)
    pose[:, 0] = rng.uniform(0.0, 640.0, 17)
    pose[:, 1] = rng.uniform(0.0, 480.0, 17)
    pose[:, 3] = rng.uniform(0.05, 1.0, 17)
    if missing_prob > 0.0:
        missing = rng.uniform(size=17) < missing_prob
        pose[missing, :] = 0.0
    return pose


def _skeleton_frame(px: float, wrist_x: float, root_y: float) -> np.ndarray:
    """One synthetic NTU-25 frame with unit torso (spine_base -> spine_shoulder)."""
    f = np.zeros((25, 3), dtype=np.float64)
    f[0] = (px, 1.0, 0.0)        # spine_base
    f[20] = (px, 0.0, 0.0)       # spine_shoulder, torso length 1.0
    f[1] = (px, root_y, 0.0)     # spine_mid (root)
    f[6] = (wrist_x, 0.2, 0.0)   # left wrist
    f[10] = (wrist_x, 0.3, 0.0)  # right wrist
    return f


def punch_pair_sample(t: int = 100, wrist_step: float = 0.12,
                      separation: float = 0.9) -> NtuSample:
    """Two persons one torso-length apart with oscillating wrists; both
    wrists move wrist_step per frame so mean wrist speed == wrist_step."""
    coords = np.zeros((2, t, 25, 3), dtype=np.float64)
    for i in range(t):
        off = (i % 2) * wrist_step
        coords[0, i] = _skeleton_frame(0.0, 0.4 + off, 0.5)
        coords[1, i] = _skeleton_frame(separation, separation - 0.4 - off, 0.5)
    conf = np.where(np.any(coords != 0.0, axis=-1), 1.0, 0.0)
    return NtuSample(coords, conf)


def fall_single_sample(t: int = 100, drop: float = 0.8) -> NtuSample:
    """Lone person whose root y ramps down by `drop` torso units (image +y
    is down, so y increases)."""
    coords = np.zeros((2, t, 25, 3), dtype=np.float64)
    for i in range(t):
        coords[0, i] = _skeleton_frame(0.0, 0.4, 0.5 + drop * i / (t - 1))
    conf = np.where(np.any(coords != 0.0, axis=-1), 1.0, 0.0)
    return NtuSample(coords, conf)


def idle_single_sample(t: int = 100) -> NtuSample:
    coords = np.zeros((2, t, 25, 3), dtype=np.float64)
    for i in range(t):
        coords[0, i] = _skeleton_frame(0.0, 0.4, 0.5)
    conf = np.where(np.any(coords != 0.0, axis=-1), 1.0, 0.0)
    return NtuSample(coords, conf)


@pytest.fixture
def service_env(tmp_path):
    """Environment for a fast, unpaced service instance rooted in tmp."""
    return {
        "EDGEWATCH_STORAGE_ROOT": str(tmp_path / "storage"),
        "SKEL_PACED": "0",
        "VLM_PACED": "0",
    }
