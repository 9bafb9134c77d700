"""Canonical keypoint layouts and the cross-layout mapping tables.

Three skeleton layouts flow through the engine:

COCO-17 (detector output, 0-based):
    0: nose           1: left_eye       2: right_eye
    3: left_ear       4: right_ear      5: left_shoulder
    6: right_shoulder 7: left_elbow     8: right_elbow
    9: left_wrist    10: right_wrist   11: left_hip
   12: right_hip    13: left_knee     14: right_knee
   15: left_ankle   16: right_ankle

H36M-17 (lifting format, pelvis-rooted spine chain):
    0: pelvis         1: right_hip      2: right_knee
    3: right_ankle    4: left_hip       5: left_knee
    6: left_ankle     7: spine          8: thorax
    9: neck          10: head          11: left_shoulder
   12: left_elbow   13: left_wrist    14: right_shoulder
   15: right_elbow  16: right_wrist

NTU-25 (Kinect-V2 layout consumed by the classifier; stored 0-based,
the conventional 1-based joint number is index + 1):
    0: spine_base     1: spine_mid      2: neck
    3: head           4: left_shoulder  5: left_elbow
    6: left_wrist     7: left_hand      8: right_shoulder
    9: right_elbow   10: right_wrist   11: right_hand
   12: left_hip      13: left_knee     14: left_ankle
   15: left_foot     16: right_hip     17: right_knee
   18: right_ankle   19: right_foot    20: spine_shoulder
   21: left_hand_tip 22: left_thumb    23: right_hand_tip
   24: right_thumb

These index tables are constant process-wide; golden files, the replay
schema and the classifier input layout all assume them.  A machine-readable
copy lives in docs/joint_layouts.json and is kept in sync by a test.

Pose arrays everywhere are float64 of shape (J, 4) with columns
(x, y, z, conf).  conf == 0 marks a missing joint, whose coordinates are
forced to (0, 0, 0).
"""

from __future__ import annotations

import numpy as np

COCO17_NAMES: tuple[str, ...] = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)

H36M17_NAMES: tuple[str, ...] = (
    "pelvis",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "spine",
    "thorax",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
)

NTU25_NAMES: tuple[str, ...] = (
    "spine_base",
    "spine_mid",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "left_hand",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "right_hand",
    "left_hip",
    "left_knee",
    "left_ankle",
    "left_foot",
    "right_hip",
    "right_knee",
    "right_ankle",
    "right_foot",
    "spine_shoulder",
    "left_hand_tip",
    "left_thumb",
    "right_hand_tip",
    "right_thumb",
)

COCO17 = {name: i for i, name in enumerate(COCO17_NAMES)}
H36M17 = {name: i for i, name in enumerate(H36M17_NAMES)}
NTU25 = {name: i for i, name in enumerate(NTU25_NAMES)}

# spine_mid is the normalization root for classifier preprocessing
NTU_ROOT_JOINT = NTU25["spine_mid"]

# COCO joints used for skeleton centroids (shoulders + hips)
CENTROID_JOINTS: tuple[int, ...] = (5, 6, 11, 12)

# COCO -> H36M: direct copies, (h36m index, coco index)
COCO_TO_H36M_DIRECT: tuple[tuple[int, int], ...] = (
    (H36M17["right_hip"], COCO17["right_hip"]),
    (H36M17["right_knee"], COCO17["right_knee"]),
    (H36M17["right_ankle"], COCO17["right_ankle"]),
    (H36M17["left_hip"], COCO17["left_hip"]),
    (H36M17["left_knee"], COCO17["left_knee"]),
    (H36M17["left_ankle"], COCO17["left_ankle"]),
    (H36M17["head"], COCO17["nose"]),
    (H36M17["left_shoulder"], COCO17["left_shoulder"]),
    (H36M17["left_elbow"], COCO17["left_elbow"]),
    (H36M17["left_wrist"], COCO17["left_wrist"]),
    (H36M17["right_shoulder"], COCO17["right_shoulder"]),
    (H36M17["right_elbow"], COCO17["right_elbow"]),
    (H36M17["right_wrist"], COCO17["right_wrist"]),
)

# COCO -> H36M: synthetic joints, each the midpoint of two parents.
# Parents are named in *H36M-or-COCO* terms and resolved in order, so
# spine/neck may reference the synthetic pelvis/thorax computed before them.
# (h36m index, parent_a, parent_b) where a parent is ("coco", i) or ("h36m", i)
COCO_TO_H36M_MIDPOINTS: tuple[tuple[int, tuple[str, int], tuple[str, int]], ...] = (
    (H36M17["pelvis"], ("coco", COCO17["left_hip"]), ("coco", COCO17["right_hip"])),
    (H36M17["thorax"], ("coco", COCO17["left_shoulder"]), ("coco", COCO17["right_shoulder"])),
    (H36M17["spine"], ("h36m", H36M17["pelvis"]), ("h36m", H36M17["thorax"])),
    (H36M17["neck"], ("h36m", H36M17["thorax"]), ("coco", COCO17["nose"])),
)

# H36M -> NTU-25: direct copies, (ntu index, h36m index)
H36M_TO_NTU_DIRECT: tuple[tuple[int, int], ...] = (
    (NTU25["spine_base"], H36M17["pelvis"]),
    (NTU25["spine_mid"], H36M17["spine"]),
    (NTU25["neck"], H36M17["neck"]),
    (NTU25["head"], H36M17["head"]),
    (NTU25["left_shoulder"], H36M17["left_shoulder"]),
    (NTU25["left_elbow"], H36M17["left_elbow"]),
    (NTU25["left_wrist"], H36M17["left_wrist"]),
    (NTU25["right_shoulder"], H36M17["right_shoulder"]),
    (NTU25["right_elbow"], H36M17["right_elbow"]),
    (NTU25["right_wrist"], H36M17["right_wrist"]),
    (NTU25["left_hip"], H36M17["left_hip"]),
    (NTU25["left_knee"], H36M17["left_knee"]),
    (NTU25["left_ankle"], H36M17["left_ankle"]),
    (NTU25["right_hip"], H36M17["right_hip"]),
    (NTU25["right_knee"], H36M17["right_knee"]),
    (NTU25["right_ankle"], H36M17["right_ankle"]),
)

# spine_shoulder sits between spine and thorax on the Kinect chain:
# midpoint of the two, conf = min of the two.
NTU_SPINE_SHOULDER_PARENTS: tuple[int, int] = (H36M17["spine"], H36M17["thorax"])

# The 8 NTU joints absent from H36M, approximated from a parent joint plus a
# small offset scaled by the per-frame torso length (pelvis -> thorax):
#   (ntu index, parent h36m index, limb-base h36m index, fraction, lateral)
# Offset direction is the unit vector limb_base -> parent ("along the limb");
# lateral entries rotate that direction 90 degrees in the x-y plane (sign on
# the fraction picks the side).  conf copies the parent's conf.
H36M_TO_NTU_OFFSET: tuple[tuple[int, int, int, float, bool], ...] = (
    (NTU25["left_hand"], H36M17["left_wrist"], H36M17["left_elbow"], 0.05, False),
    (NTU25["right_hand"], H36M17["right_wrist"], H36M17["right_elbow"], 0.05, False),
    (NTU25["left_foot"], H36M17["left_ankle"], H36M17["left_knee"], 0.05, False),
    (NTU25["right_foot"], H36M17["right_ankle"], H36M17["right_knee"], 0.05, False),
    (NTU25["left_hand_tip"], H36M17["left_wrist"], H36M17["left_elbow"], 0.08, False),
    (NTU25["right_hand_tip"], H36M17["right_wrist"], H36M17["right_elbow"], 0.08, False),
    (NTU25["left_thumb"], H36M17["left_wrist"], H36M17["left_elbow"], 0.04, True),
    (NTU25["right_thumb"], H36M17["right_wrist"], H36M17["right_elbow"], -0.04, True),
)

TORSO_ENDPOINTS: tuple[int, int] = (H36M17["pelvis"], H36M17["thorax"])

# COCO limb connections for overlay rendering (pairs of COCO indices)
COCO_LIMBS: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (1, 3), (2, 4),          # head
    (5, 6), (5, 7), (7, 9), (6, 8), (8, 10),  # arms
    (5, 11), (6, 12), (11, 12),               # torso
    (11, 13), (13, 15), (12, 14), (14, 16),   # legs
)


def new_pose(n_joints: int) -> np.ndarray:
    """All-missing pose: zeros, shape (n_joints, 4)."""
    return np.zeros((n_joints, 4), dtype=np.float64)


def validate_pose(pose: np.ndarray, n_joints: int) -> np.ndarray:
    """Coerce to float64 (J, 4) and check joint count; returns the array."""
    arr = np.asarray(pose, dtype=np.float64)
    if arr.shape != (n_joints, 4):
        raise ValueError(f"expected pose of shape ({n_joints}, 4), got {arr.shape}")
    return arr


def _parent_for(layout: str, index: int) -> str:
    """Kinematic parent joint name used in the machine-readable export."""
    chains = {
        "coco17": {
            0: "", 1: "nose", 2: "nose", 3: "left_eye", 4: "right_eye",
            5: "", 6: "", 7: "left_shoulder", 8: "right_shoulder",
            9: "left_elbow", 10: "right_elbow", 11: "", 12: "",
            13: "left_hip", 14: "right_hip", 15: "left_knee", 16: "right_knee",
        },
        "h36m17": {
            0: "", 1: "pelvis", 2: "right_hip", 3: "right_knee",
            4: "pelvis", 5: "left_hip", 6: "left_knee", 7: "pelvis",
            8: "spine", 9: "thorax", 10: "neck", 11: "thorax",
            12: "left_shoulder", 13: "left_elbow", 14: "thorax",
            15: "right_shoulder", 16: "right_elbow",
        },
        "ntu25": {
            0: "", 1: "spine_base", 2: "spine_shoulder", 3: "neck",
            4: "spine_shoulder", 5: "left_shoulder", 6: "left_elbow",
            7: "left_wrist", 8: "spine_shoulder", 9: "right_shoulder",
            10: "right_elbow", 11: "right_wrist", 12: "spine_base",
            13: "left_hip", 14: "left_knee", 15: "left_ankle",
            16: "spine_base", 17: "right_hip", 18: "right_knee",
            19: "right_ankle", 20: "spine_mid", 21: "left_hand",
            22: "left_wrist", 23: "right_hand", 24: "right_wrist",
        },
    }
    return chains[layout][index]


def export_layouts() -> dict:
    """Machine-readable joint tables: one record per joint with index, name,
    kinematic parent, and how the joint is sourced from the upstream layout."""
    coco = [
        {"index": i, "name": n, "parent": _parent_for("coco17", i), "source": "detector"}
        for i, n in enumerate(COCO17_NAMES)
    ]

    h36m_source: dict[int, str] = {}
    for h_i, c_i in COCO_TO_H36M_DIRECT:
        h36m_source[h_i] = f"coco17:{COCO17_NAMES[c_i]}"
    for h_i, pa, pb in COCO_TO_H36M_MIDPOINTS:
        names = []
        for kind, idx in (pa, pb):
            names.append(COCO17_NAMES[idx] if kind == "coco" else H36M17_NAMES[idx])
        h36m_source[h_i] = f"midpoint({names[0]}, {names[1]})"
    h36m = [
        {"index": i, "name": n, "parent": _parent_for("h36m17", i), "source": h36m_source[i]}
        for i, n in enumerate(H36M17_NAMES)
    ]

    ntu_source: dict[int, str] = {}
    for n_i, h_i in H36M_TO_NTU_DIRECT:
        ntu_source[n_i] = f"h36m17:{H36M17_NAMES[h_i]}"
    sa, sb = NTU_SPINE_SHOULDER_PARENTS
    ntu_source[NTU25["spine_shoulder"]] = (
        f"midpoint({H36M17_NAMES[sa]}, {H36M17_NAMES[sb]})"
    )
    for n_i, parent, base, frac, lateral in H36M_TO_NTU_OFFSET:
        direction = "lateral" if lateral else "along limb"
        ntu_source[n_i] = (
            f"h36m17:{H36M17_NAMES[parent]} + {frac:+.2f}*torso ({direction}, "
            f"limb {H36M17_NAMES[base]}->{H36M17_NAMES[parent]})"
        )
    ntu = [
        {"index": i, "name": n, "parent": _parent_for("ntu25", i), "source": ntu_source[i]}
        for i, n in enumerate(NTU25_NAMES)
    ]

    return {"coco17": coco, "h36m17": h36m, "ntu25": ntu}
