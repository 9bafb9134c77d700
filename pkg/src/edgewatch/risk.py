"""Action classification handles and risk-level aggregation.

The classifier is pluggable: a remote GCN endpoint, or a deterministic
kinematic mock that maps simple motion statistics (wrist speed, person
proximity, vertical root drop) onto the same class simplex.  Risk levels
come from summing probability mass over configured class groups with
strict thresholds and DANGER taking precedence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .inference_client import InferenceError, infer
from .preprocess import NtuSample, unpack_gcn_input

NUM_CLASSES = 60

# NTU joint indices used by the mock statistics.
_ROOT = 1            # spine_mid
_SPINE_TOP = 20      # spine_shoulder
_WRISTS = (6, 10)


class RiskLevel(enum.Enum):
    SAFE = "SAFE"
    WARNING = "WARNING"
    DANGER = "DANGER"


@dataclass(frozen=True)
class RiskConfig:
    """Class groups are 1-based action labels (A<n>); thresholds are strict."""

    danger_classes: frozenset[int] = frozenset({50, 51, 52})
    danger_threshold: float = 0.3
    warning_classes: frozenset[int] = frozenset({7, 42, 43, 57})
    warning_threshold: float = 0.5

    def __post_init__(self):
        for group in (self.danger_classes, self.warning_classes):
            if any(c < 1 for c in group):
                raise ValueError("class labels are 1-based")


def class_label(class_id: int) -> str:
    return f"A{class_id}"


def class_mass(probs: np.ndarray, classes: frozenset[int]) -> float:
    idx = [c - 1 for c in sorted(classes) if c - 1 < probs.shape[0]]
    return float(probs[idx].sum())


@dataclass(frozen=True)
class RiskAssessment:
    level: RiskLevel
    danger_mass: float
    warning_mass: float
    top_class: int          # 1-based
    top_prob: float
    track_ids: tuple[int, ...]
    frame_span: tuple[int, int]

    @property
    def top_label(self) -> str:
        return class_label(self.top_class)


def aggregate_risk(
    probs: np.ndarray,
    cfg: RiskConfig,
    track_ids: tuple[int, ...] = (),
    frame_span: tuple[int, int] = (0, 0),
) -> RiskAssessment:
    """DANGER if danger mass exceeds its threshold, else WARNING on the
    warning mass, else SAFE.  Both exceeded resolves to DANGER."""
    probs = np.asarray(probs, dtype=np.float64)
    danger = class_mass(probs, cfg.danger_classes)
    warning = class_mass(probs, cfg.warning_classes)
    if danger > cfg.danger_threshold:
        level = RiskLevel.DANGER
    elif warning > cfg.warning_threshold:
        level = RiskLevel.WARNING
    else:
        level = RiskLevel.SAFE
    top = int(np.argmax(probs))
    return RiskAssessment(
        level=level,
        danger_mass=danger,
        warning_mass=warning,
        top_class=top + 1,
        top_prob=float(probs[top]),
        track_ids=track_ids,
        frame_span=frame_span,
    )


@dataclass(frozen=True)
class MockClassifierConfig:
    """Thresholds for the kinematic mock, pinned by golden tests.

    Speeds and drops are in torso-length units per frame; proximity in
    torso lengths.
    """

    num_classes: int = NUM_CLASSES
    speed_thresh: float = 0.08
    proximity_thresh: float = 1.0
    drop_thresh: float = 0.5
    punch_mass: float = 0.6      # A50
    push_mass: float = 0.2       # A52
    fall_mass: float = 0.7       # A43
    eps: float = 1e-9


class ClassifierKind(enum.Enum):
    MOCK_KINEMATIC = "mock_kinematic"
    EXTERNAL = "external"


class ClassifierUnavailableError(RuntimeError):
    """Remote classifier endpoint failed or returned malformed output."""


@dataclass(frozen=True)
class ClassifierHandle:
    kind: ClassifierKind = ClassifierKind.MOCK_KINEMATIC
    endpoint: str = ""
    model: str = "gcn"
    timeout_s: float = 10.0
    mock_cfg: MockClassifierConfig = field(default_factory=MockClassifierConfig)
    transport: object = None


def _torso_scale(coords: np.ndarray, valid: np.ndarray, eps: float) -> float:
    """Median spine_base to spine_shoulder length over valid frames."""
    if not valid.any():
        return 0.0
    segs = coords[valid][:, _SPINE_TOP] - coords[valid][:, 0]
    lengths = np.linalg.norm(segs, axis=-1)
    lengths = lengths[lengths > eps]
    if lengths.size == 0:
        return 0.0
    return float(np.median(lengths))


def _wrist_speed(coords: np.ndarray, valid: np.ndarray, torso: float, eps: float) -> float:
    """Mean per-frame wrist displacement over consecutive valid frames,
    in torso units."""
    if torso <= eps:
        return 0.0
    both = valid[1:] & valid[:-1]
    if not both.any():
        return 0.0
    step = coords[1:][both][:, _WRISTS] - coords[:-1][both][:, _WRISTS]
    disp = np.linalg.norm(step, axis=-1).mean(axis=1)
    return float(disp.mean()) / torso


def _root_drop(coords: np.ndarray, valid: np.ndarray, torso: float, eps: float) -> float:
    """Largest downward excursion of the root joint y (image +y is down),
    in torso units."""
    if torso <= eps:
        return 0.0
    ys = coords[valid][:, _ROOT, 1]
    if ys.size < 2:
        return 0.0
    running_min = np.minimum.accumulate(ys)
    return float(np.max(ys - running_min)) / torso


def mock_kinematic_classifier(sample: NtuSample, cfg: MockClassifierConfig) -> np.ndarray:
    """Deterministic class distribution from clip kinematics.

    Two interacting persons with fast wrist motion concentrate mass on
    punch/push classes; a lone person with a large root drop concentrates
    on the fall class; everything else is uniform.  Always a proper
    distribution.
    """
    valid = sample.valid_mask()
    present = valid.any(axis=1)
    torso = [_torso_scale(sample.coords[p], valid[p], cfg.eps) for p in range(2)]

    speed = 0.0
    for p in range(2):
        if present[p]:
            speed = max(speed, _wrist_speed(sample.coords[p], valid[p], torso[p], cfg.eps))

    proximity = float("inf")
    if present.all():
        both = valid[0] & valid[1]
        if both.any():
            delta = sample.coords[0, both, _ROOT] - sample.coords[1, both, _ROOT]
            proximity = float(np.median(np.linalg.norm(delta, axis=-1)))
            scale = max(min(t for t in torso if t > cfg.eps), cfg.eps) \
                if any(t > cfg.eps for t in torso) else cfg.eps
            proximity /= scale

    probs = np.full(cfg.num_classes, 1.0 / cfg.num_classes)
    if present.all() and speed > cfg.speed_thresh and proximity < cfg.proximity_thresh:
        rest = 1.0 - cfg.punch_mass - cfg.push_mass
        probs = np.full(cfg.num_classes, rest / (cfg.num_classes - 2))
        probs[49] = cfg.punch_mass   # A50 punch/slap
        probs[51] = cfg.push_mass    # A52 push
    elif present[0] and not present[1]:
        drop = _root_drop(sample.coords[0], valid[0], torso[0], cfg.eps)
        if drop > cfg.drop_thresh:
            probs = np.full(cfg.num_classes, (1.0 - cfg.fall_mass) / (cfg.num_classes - 1))
            probs[42] = cfg.fall_mass  # A43 falling down
    return probs


def classify(tensor: np.ndarray, handle: ClassifierHandle) -> list[np.ndarray]:
    """Run the configured classifier over a (nc, 2, 100, 25, 3) tensor,
    one distribution per clip."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.ndim != 5:
        raise ValueError(f"expected a rank-5 clip tensor, got shape {tensor.shape}")
    if tensor.shape[0] == 0:
        return []

    if handle.kind is ClassifierKind.MOCK_KINEMATIC:
        return [
            mock_kinematic_classifier(s, handle.mock_cfg)
            for s in unpack_gcn_input(tensor)
        ]

    try:
        out = infer(
            handle.endpoint,
            handle.model,
            tensor,
            meta={"task": "classify"},
            timeout_s=handle.timeout_s,
            transport=handle.transport,
        )
    except InferenceError as exc:
        raise ClassifierUnavailableError(str(exc)) from exc
    if out.ndim != 2 or out.shape[0] != tensor.shape[0]:
        raise ClassifierUnavailableError(
            f"classifier returned shape {out.shape} for {tensor.shape[0]} clips"
        )
    out = np.clip(out, 0.0, None)
    sums = out.sum(axis=1, keepdims=True)
    if np.any(sums <= 0.0):
        raise ClassifierUnavailableError("classifier returned a zero distribution")
    return list(out / sums)
