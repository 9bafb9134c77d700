"""Synthetic pose scenarios for fixtures, benchmarks, and tests.

Every generator is a pure function of (seed, parameters) returning replay
frame records, so fixtures regenerate bit-identically.  Geometry targets a
640x480 canvas at 30 FPS with ~200 px tall persons; motion magnitudes are
chosen to sit well clear of the kinematic classifier thresholds they are
meant to trip (or not trip).
"""

from __future__ import annotations

import numpy as np

FPS = 30
CANVAS = (640, 480)

# Template joint offsets relative to person center, in fractions of height.
# COCO order: nose, eyes, ears, shoulders, elbows, wrists, hips, knees, ankles.
_TEMPLATE = np.array([
    [0.00, -0.45],
    [0.03, -0.47], [-0.03, -0.47],
    [0.06, -0.46], [-0.06, -0.46],
    [0.12, -0.32], [-0.12, -0.32],
    [0.18, -0.18], [-0.18, -0.18],
    [0.22, -0.05], [-0.22, -0.05],
    [0.08, -0.02], [-0.08, -0.02],
    [0.09, 0.22], [-0.09, 0.22],
    [0.10, 0.45], [-0.10, 0.45],
])

_LEFT_WRIST, _RIGHT_WRIST = 9, 10
_BOX_WIDTH_FRAC = 0.35


def _person(cx, cy, height, rng, score=0.9, wrist_dx=0.0, jitter=0.5):
    """One detection record: template skeleton + gaussian jitter."""
    kpts = _TEMPLATE * height
    kpts = kpts + np.array([cx, cy])
    kpts[_LEFT_WRIST, 0] += wrist_dx
    kpts[_RIGHT_WRIST, 0] += wrist_dx
    kpts += rng.normal(0.0, jitter, kpts.shape)
    conf = 0.85 + 0.1 * rng.random(17)
    box = [float(cx), float(cy), _BOX_WIDTH_FRAC * height, float(height)]
    return {
        "box": [round(v, 2) for v in box],
        "score": round(float(score + rng.normal(0.0, 0.01)), 4),
        "kpts": [[round(float(x), 2), round(float(y), 2), round(float(c), 4)]
                 for (x, y), c in zip(kpts, conf)],
    }


def _frame(index, detections):
    return {
        "frame": index,
        "ts_ms": int(round(index * 1000.0 / FPS)),
        "detections": detections,
    }


def single_static(seed: int = 0, frames: int = 430) -> list[dict]:
    """One person standing still: tracker and cadence baseline, zero alerts."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(frames):
        out.append(_frame(i, [_person(320, 240, 200, rng)]))
    return out


def two_person_punch(seed: int = 0, frames: int = 260) -> list[dict]:
    """Two adjacent persons trading fast wrist strikes.

    40 px apart at height 200 keeps the pair under one torso length after
    normalization; 20 px wrist oscillation at period 12 lands wrist speed
    near 0.15 torso/frame, about twice the mock danger threshold.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(frames):
        swing = 20.0 * np.sin(2.0 * np.pi * i / 12.0)
        dets = [
            _person(300, 240, 200, rng, wrist_dx=swing),
            _person(340, 240, 200, rng, wrist_dx=-swing),
        ]
        out.append(_frame(i, dets))
    return out


def fall(seed: int = 0, frames: int = 200) -> list[dict]:
    """One person dropping 60 px (1.33 torso lengths) between frames 40-80,
    then motionless on the ground."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(frames):
        drop = 1.5 * min(max(i - 40, 0), 40)
        out.append(_frame(i, [_person(320, 200 + drop, 200, rng)]))
    return out


def crossing_occlusion(
    seed: int = 0,
    mode: str = "absent",
    gap: int = 60,
    frames: int | None = None,
) -> list[dict]:
    """Two walkers exercising the association edge cases.

    mode="absent": person B vanishes for `gap` frames mid-walk and reappears
    on its extrapolated path (identity survives up to the loss horizon).
    mode="lowscore": person B reverses direction while its detection score
    sits at 0.3 for 5 frames, so only low-score association can follow the
    turn.
    """
    if mode not in ("absent", "lowscore"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    out = []

    if mode == "absent":
        frames = 230 if frames is None else frames
        vanish_at = 90
        for i in range(frames):
            dets = [_person(560 - 2.0 * i, 240, 200, rng)]
            if not (vanish_at <= i < vanish_at + gap):
                dets.append(_person(80 + 2.0 * i, 240, 200, rng))
            out.append(_frame(i, dets))
        return out

    frames = 160 if frames is None else frames
    turn_at, low_span, speed = 80, 5, 6.0
    for i in range(frames):
        if i <= turn_at:
            bx = 40 + speed * i
        else:
            bx = 40 + speed * turn_at - speed * (i - turn_at)
        score = 0.3 if turn_at <= i < turn_at + low_span else 0.9
        dets = [
            _person(400, 100, 200, rng),
            _person(bx, 240, 200, rng, score=score),
        ]
        out.append(_frame(i, dets))
    return out


SCENARIOS = {
    "single_static": single_static,
    "two_person_punch": two_person_punch,
    "fall": fall,
    "crossing_occlusion": crossing_occlusion,
}


def generate(name: str, seed: int = 0, **params) -> list[dict]:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; have {sorted(SCENARIOS)}")
    return SCENARIOS[name](seed=seed, **params)
