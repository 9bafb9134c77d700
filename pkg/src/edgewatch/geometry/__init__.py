"""Keypoint layouts, the joint remapping chain and lifting backends."""

from .layouts import (
    CENTROID_JOINTS,
    COCO17,
    COCO17_NAMES,
    COCO_LIMBS,
    H36M17,
    H36M17_NAMES,
    NTU25,
    NTU25_NAMES,
    NTU_ROOT_JOINT,
    export_layouts,
    new_pose,
)
from .lifting import LifterHandle, LifterKind, LifterUnavailableError, lift_sequence, pseudo3d_lift
from .remap import coco_to_h36m, coco_to_h36m_seq, h36m_to_ntu25, remap_full

__all__ = [
    "CENTROID_JOINTS",
    "COCO17",
    "COCO17_NAMES",
    "COCO_LIMBS",
    "H36M17",
    "H36M17_NAMES",
    "NTU25",
    "NTU25_NAMES",
    "NTU_ROOT_JOINT",
    "LifterHandle",
    "LifterKind",
    "LifterUnavailableError",
    "coco_to_h36m",
    "coco_to_h36m_seq",
    "export_layouts",
    "h36m_to_ntu25",
    "lift_sequence",
    "new_pose",
    "pseudo3d_lift",
    "remap_full",
]
