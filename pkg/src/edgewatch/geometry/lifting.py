"""2D -> 3D lifting backends behind a single handle.

PSEUDO_3D is the dependency-free fallback: x/y are normalized to [-1, 1]
by the clip-wide tight bounding box of all confident joints (uniform
scale, so aspect ratio survives and per-frame boxes cannot inject fake
motion), z is fixed at 0 and confidences pass through untouched.

EXTERNAL delegates to an inference server speaking the /v1/infer
protocol (see edgewatch.inference_client); the request carries
(T, 17, 3) = (x, y, conf) and the response must return (T, 17, 3) xyz.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..inference_client import InferenceError, infer


class LifterKind(str, Enum):
    PSEUDO_3D = "pseudo_3d"
    EXTERNAL = "external"


class LifterUnavailableError(RuntimeError):
    """External lifting backend unreachable; caller may retry with PSEUDO_3D."""


def pseudo3d_lift(seq: np.ndarray) -> np.ndarray:
    """Normalize a (T, 17, 4) 2D sequence into pseudo-3D (z = 0).

    Missing joints (conf 0) stay at (0, 0, 0, 0); only confident joints
    define the normalization box and only they are transformed.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 3 or seq.shape[0] < 1:
        raise ValueError(f"expected non-empty (T, J, 4) sequence, got shape {seq.shape}")
    out = seq.copy()
    out[:, :, 2] = 0.0

    confident = seq[:, :, 3] > 0.0
    if not confident.any():
        return out

    xs = seq[:, :, 0][confident]
    ys = seq[:, :, 1][confident]
    cx = 0.5 * (xs.min() + xs.max())
    cy = 0.5 * (ys.min() + ys.max())
    half = 0.5 * max(xs.max() - xs.min(), ys.max() - ys.min())
    if half <= 0.0:
        half = 1.0  # all confident joints coincide; park them at the origin

    out[:, :, 0] = np.where(confident, (seq[:, :, 0] - cx) / half, 0.0)
    out[:, :, 1] = np.where(confident, (seq[:, :, 1] - cy) / half, 0.0)
    return out


@dataclass(frozen=True)
class LifterHandle:
    """Descriptor for a lifting backend; PSEUDO_3D needs no fields."""

    kind: LifterKind = LifterKind.PSEUDO_3D
    endpoint: str = ""
    model: str = "lifter"
    timeout_s: float = 10.0
    transport: object = None  # httpx transport override for tests

    def lift(self, seq: np.ndarray) -> np.ndarray:
        return lift_sequence(seq, self)


def lift_sequence(seq: np.ndarray, lifter: LifterHandle) -> np.ndarray:
    """Lift a (T, 17, 4) 2D sequence to 3D; length, joint count and conf
    are preserved whichever backend runs."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 3 or seq.shape[0] < 1:
        raise ValueError(f"expected non-empty (T, J, 4) sequence, got shape {seq.shape}")

    if lifter.kind == LifterKind.PSEUDO_3D:
        return pseudo3d_lift(seq)

    t, j = seq.shape[0], seq.shape[1]
    request = seq[:, :, (0, 1, 3)]
    try:
        xyz = infer(
            lifter.endpoint,
            lifter.model,
            request,
            meta={"task": "lift"},
            timeout_s=lifter.timeout_s,
            transport=lifter.transport,
        )
    except InferenceError as exc:
        raise LifterUnavailableError(str(exc)) from exc
    if xyz.shape != (t, j, 3):
        raise LifterUnavailableError(
            f"lifting backend returned shape {xyz.shape}, expected {(t, j, 3)}"
        )
    out = np.empty((t, j, 4), dtype=np.float64)
    out[:, :, :3] = xyz
    out[:, :, 3] = seq[:, :, 3]
    return out
