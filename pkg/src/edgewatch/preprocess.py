"""NTU-25 sample normalization and fixed-length resampling.

Mirrors the GCN input convention: two person slots, 25 joints, 3
coordinates, confidence carried as a sideband.  A frame is valid for a
person when any joint coordinate is nonzero; zero-padded frames and the
absent second person simply stay zero through every stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry.layouts import NTU_ROOT_JOINT

TARGET_LEN = 100


class DegenerateSampleError(ValueError):
    """Sample has no valid frame in either person slot."""


@dataclass(frozen=True)
class NtuSample:
    """Two-slot NTU-25 clip: coords (2, T, 25, 3) plus conf (2, T, 25)."""

    coords: np.ndarray
    conf: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        conf = np.asarray(self.conf, dtype=np.float64)
        if coords.ndim != 4 or coords.shape[0] != 2 or coords.shape[2:] != (25, 3):
            raise ValueError(f"coords must be (2, T, 25, 3), got {coords.shape}")
        if conf.shape != coords.shape[:3]:
            raise ValueError(f"conf must be (2, T, 25), got {conf.shape}")
        if coords.shape[1] < 1:
            raise ValueError("sample must hold at least one frame")
        if not (np.isfinite(coords).all() and np.isfinite(conf).all()):
            raise ValueError("sample contains non-finite values")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "conf", conf)

    @property
    def length(self) -> int:
        return self.coords.shape[1]

    def valid_mask(self) -> np.ndarray:
        """(2, T) bool: frame has any nonzero coordinate for that person."""
        return np.any(self.coords != 0.0, axis=(2, 3))

    @classmethod
    def from_persons(cls, persons: np.ndarray) -> "NtuSample":
        """Build from a (2, T, 25, 4) stack with trailing confidence column."""
        persons = np.asarray(persons, dtype=np.float64)
        if persons.ndim != 4 or persons.shape[0] != 2 or persons.shape[2:] != (25, 4):
            raise ValueError(f"expected (2, T, 25, 4), got {persons.shape}")
        return cls(persons[..., :3].copy(), persons[..., 3].copy())


def pre_normalize_3d(sample: NtuSample) -> NtuSample:
    """Order person slots by valid-frame count and center on the root joint.

    The slot with strictly more valid frames becomes person 0.  The root is
    person 0's spine_mid at its first valid frame; it is subtracted from
    every valid frame of both persons, while all-zero frames stay zero.
    """
    coords = sample.coords.copy()
    conf = sample.conf.copy()
    valid = np.any(coords != 0.0, axis=(2, 3))
    counts = valid.sum(axis=1)
    if counts[1] > counts[0]:
        coords = coords[::-1].copy()
        conf = conf[::-1].copy()
        valid = valid[::-1].copy()
    if counts.sum() == 0:
        raise DegenerateSampleError("no valid frames in either person slot")

    first = int(np.argmax(valid[0]))
    root = coords[0, first, NTU_ROOT_JOINT].copy()
    coords[valid] -= root
    return NtuSample(coords, conf)


def uniform_sample_decode(sample: NtuSample, target_len: int = TARGET_LEN) -> NtuSample:
    """Resample to target_len frames by linear interpolation on the uniform
    grid p_j = j * (T_in - 1) / (target_len - 1).

    Single-frame input replicates.  Zero-padded frames interpolate like any
    other data.  Confidence is resampled on the same grid.
    """
    if target_len < 2:
        raise ValueError("target_len must be >= 2")
    t_in = sample.length
    if t_in == 1:
        coords = np.repeat(sample.coords, target_len, axis=1)
        conf = np.repeat(sample.conf, target_len, axis=1)
        return NtuSample(coords, conf)

    positions = np.arange(target_len, dtype=np.float64) * (t_in - 1) / (target_len - 1)
    lo = np.floor(positions).astype(np.int64)
    lo = np.minimum(lo, t_in - 2)
    frac = positions - lo

    def blend(arr: np.ndarray) -> np.ndarray:
        shape = (1, target_len) + (1,) * (arr.ndim - 2)
        w = frac.reshape(shape)
        return arr[:, lo] * (1.0 - w) + arr[:, lo + 1] * w

    return NtuSample(blend(sample.coords), blend(sample.conf))


def format_gcn_input(samples: list[NtuSample]) -> np.ndarray:
    """Stack length-100 samples into a (num_clips, 2, 100, 25, 3) tensor."""
    if not samples:
        return np.zeros((0, 2, TARGET_LEN, 25, 3), dtype=np.float64)
    for i, s in enumerate(samples):
        if s.length != TARGET_LEN:
            raise ValueError(f"sample {i} has length {s.length}, expected {TARGET_LEN}")
    return np.stack([s.coords for s in samples]).astype(np.float64)


def unpack_gcn_input(tensor: np.ndarray) -> list[NtuSample]:
    """Inverse of format_gcn_input up to the confidence sideband, which is
    reconstructed as 1 on valid frames and 0 elsewhere."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.ndim != 5 or tensor.shape[1:] != (2, TARGET_LEN, 25, 3):
        raise ValueError(f"expected (nc, 2, {TARGET_LEN}, 25, 3), got {tensor.shape}")
    out = []
    for coords in tensor:
        valid = np.any(coords != 0.0, axis=(2, 3))
        conf = np.where(valid[:, :, None], 1.0, 0.0) * np.ones((1, 1, 25))
        out.append(NtuSample(coords.copy(), conf))
    return out
