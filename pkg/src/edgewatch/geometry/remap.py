"""Joint remapping chain: COCO-17 2D -> H36M-17 2D -> (lift) -> NTU-25 3D.

All functions are pure.  Poses are float64 arrays of shape (J, 4) with
columns (x, y, z, conf); sequences stack frames on axis 0.  Confidence
rules, shared by every stage:

* a synthetic (midpoint) joint gets conf = min of its parents' confs;
* an offset-approximated joint copies its parent's conf;
* any joint whose conf comes out as 0 is "missing" and its coordinates
  are forced to (0, 0, 0) -- never NaN.
"""

from __future__ import annotations

import numpy as np

from .layouts import (
    COCO_TO_H36M_DIRECT,
    COCO_TO_H36M_MIDPOINTS,
    H36M_TO_NTU_DIRECT,
    H36M_TO_NTU_OFFSET,
    NTU25,
    NTU_SPINE_SHOULDER_PARENTS,
    TORSO_ENDPOINTS,
    validate_pose,
)


def zero_missing(pose: np.ndarray) -> np.ndarray:
    """Force coordinates of conf-0 joints to (0, 0, 0), in place."""
    missing = pose[:, 3] <= 0.0
    pose[missing, :3] = 0.0
    pose[missing, 3] = 0.0
    return pose


def coco_to_h36m(pose: np.ndarray) -> np.ndarray:
    """Map one COCO-17 pose to the H36M-17 layout.

    Direct joints copy coordinates and conf.  Pelvis, thorax, spine and
    neck are coordinate midpoints of their two parents with
    conf = min(parent confs); if either parent is missing the synthetic
    joint is missing.
    """
    src = validate_pose(pose, 17)
    out = np.zeros((17, 4), dtype=np.float64)

    for h_i, c_i in COCO_TO_H36M_DIRECT:
        out[h_i] = src[c_i]

    for h_i, pa, pb in COCO_TO_H36M_MIDPOINTS:
        a = src[pa[1]] if pa[0] == "coco" else out[pa[1]]
        b = src[pb[1]] if pb[0] == "coco" else out[pb[1]]
        out[h_i, :3] = 0.5 * (a[:3] + b[:3])
        out[h_i, 3] = min(a[3], b[3])

    return zero_missing(out)


def coco_to_h36m_seq(seq: np.ndarray) -> np.ndarray:
    """Apply coco_to_h36m frame-by-frame over a (T, 17, 4) clip."""
    seq = np.asarray(seq, dtype=np.float64)
    return np.stack([coco_to_h36m(frame) for frame in seq])


def _torso_length(frame: np.ndarray) -> float:
    """Per-frame pelvis -> thorax distance; 0 when either end is missing."""
    pelvis, thorax = TORSO_ENDPOINTS
    if frame[pelvis, 3] <= 0.0 or frame[thorax, 3] <= 0.0:
        return 0.0
    return float(np.linalg.norm(frame[thorax, :3] - frame[pelvis, :3]))


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm <= 0.0:
        return np.zeros(3, dtype=np.float64)
    return vec / norm


def h36m_frame_to_ntu25(frame: np.ndarray) -> np.ndarray:
    """Map one 3D H36M-17 frame to the NTU-25 layout.

    16 joints are direct copies, spine_shoulder is the spine/thorax
    midpoint and the 8 Kinect extremities (hands, feet, hand tips,
    thumbs) sit at their parent joint plus a fixed fraction of the torso
    length along (or lateral to) the parent limb.  A zero skeleton maps
    to a zero skeleton because every offset scales with the torso length.
    """
    src = validate_pose(frame, 17)
    out = np.zeros((25, 4), dtype=np.float64)

    for n_i, h_i in H36M_TO_NTU_DIRECT:
        out[n_i] = src[h_i]

    sa, sb = NTU_SPINE_SHOULDER_PARENTS
    out[NTU25["spine_shoulder"], :3] = 0.5 * (src[sa, :3] + src[sb, :3])
    out[NTU25["spine_shoulder"], 3] = min(src[sa, 3], src[sb, 3])

    torso = _torso_length(src)
    for n_i, parent, base, frac, lateral in H36M_TO_NTU_OFFSET:
        if src[parent, 3] <= 0.0:
            continue  # missing parent -> missing child, stays zeroed
        direction = np.zeros(3, dtype=np.float64)
        if src[base, 3] > 0.0:
            direction = _unit(src[parent, :3] - src[base, :3])
        if lateral:
            direction = _unit(np.array([-direction[1], direction[0], 0.0]))
        out[n_i, :3] = src[parent, :3] + frac * torso * direction
        out[n_i, 3] = src[parent, 3]

    return zero_missing(out)


def h36m_to_ntu25(seq: np.ndarray) -> np.ndarray:
    """Apply h36m_frame_to_ntu25 over a (T, 17, 4) clip -> (T, 25, 4)."""
    seq = np.asarray(seq, dtype=np.float64)
    return np.stack([h36m_frame_to_ntu25(frame) for frame in seq])


def remap_full(clip: np.ndarray, lifter) -> np.ndarray:
    """Run the full chain on a (T, 17, 4) COCO clip -> (T, 25, 4) NTU clip.

    Stage order is fixed: COCO->H36M remap, 2D->3D lift, H36M->NTU remap.
    Lifter errors propagate to the caller.
    """
    clip = np.asarray(clip, dtype=np.float64)
    if clip.ndim != 3 or clip.shape[0] < 1:
        raise ValueError(f"expected non-empty (T, 17, 4) clip, got shape {clip.shape}")
    h36m_2d = coco_to_h36m_seq(clip)
    h36m_3d = lifter.lift(h36m_2d)
    return h36m_to_ntu25(h36m_3d)


def remap_sample(persons: np.ndarray, lifter) -> np.ndarray:
    """Remap a two-slot (2, T, 17, 4) COCO stack to (2, T, 25, 4) NTU.

    With the pseudo-3D lifter both slots share one normalization frame
    (bounding box over the union of their confident joints), so relative
    position between the persons is preserved; lifting them separately
    would collapse both onto the origin.  An all-missing slot stays zero.
    External lifters receive each slot on its own, matching the per-person
    endpoint contract.
    """
    from .lifting import LifterKind, pseudo3d_lift

    persons = np.asarray(persons, dtype=np.float64)
    if persons.ndim != 4 or persons.shape[0] != 2 or persons.shape[2:] != (17, 4):
        raise ValueError(f"expected (2, T, 17, 4), got shape {persons.shape}")

    h2d = np.stack([coco_to_h36m_seq(slot) for slot in persons])

    if getattr(lifter, "kind", None) is LifterKind.PSEUDO_3D:
        merged = np.concatenate([h2d[0], h2d[1]], axis=1)  # (T, 34, 4)
        lifted = pseudo3d_lift(merged)
        h3d = np.stack([lifted[:, :17], lifted[:, 17:]])
    else:
        slots = []
        for slot in h2d:
            if np.any(slot[:, :, 3] > 0.0):
                slots.append(lifter.lift(slot))
            else:
                slots.append(np.zeros_like(slot))
        h3d = np.stack(slots)

    return np.stack([h36m_to_ntu25(slot) for slot in h3d])
