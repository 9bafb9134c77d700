"""Layered configuration: environment variable > config file > default.

Knob names mirror the deployment profile table (SKEL_* for the skeleton
pipeline, VLM_* for the semantic layer, EDGEWATCH_* for service-level
settings).  The config file is JSON with "skel" / "vlm" / "service"
sections keyed by the lowercase knob names.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..assembly import AssemblyConfig
from ..geometry.lifting import LifterHandle, LifterKind
from ..risk import ClassifierHandle, ClassifierKind, RiskConfig
from ..tracking import TrackerConfig
from ..vlm.config import SceneProfile, VlmConfig

CONFIG_FILE_ENV = "EDGEWATCH_CONFIG"


def _parse_bool(raw: str) -> bool:
    return str(raw).strip().lower() in ("1", "true", "yes", "on")


def _parse_int_list(raw) -> tuple[int, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(int(v) for v in raw)
    return tuple(int(v) for v in str(raw).split(",") if str(v).strip())


def _parse_str_list(raw) -> tuple[str, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(str(v) for v in raw)
    return tuple(s.strip() for s in str(raw).split(",") if s.strip())


# knob -> (env var, parser, default)
SKEL_KNOBS: dict[str, tuple[str, object, object]] = {
    "clip_len": ("SKEL_CLIP_LEN", int, 100),
    "clip_stride": ("SKEL_CLIP_STRIDE", int, 30),
    "loss_horizon": ("SKEL_LOSS_HORIZON", int, 60),
    "pair_distance": ("SKEL_PAIR_DISTANCE", float, 0.0),
    "max_persons": ("SKEL_MAX_PERSONS", int, 100),
    "yolo_confidence": ("SKEL_YOLO_CONFIDENCE", float, 0.2),
    "iou": ("SKEL_IOU", float, 0.9),
    "high_score_thresh": ("SKEL_HIGH_SCORE_THRESH", float, 0.5),
    "danger_threshold": ("SKEL_DANGER_THRESHOLD", float, 0.3),
    "warning_threshold": ("SKEL_WARNING_THRESHOLD", float, 0.5),
    "danger_classes": ("SKEL_DANGER_CLASSES", _parse_int_list, (50, 51, 52)),
    "warning_classes": ("SKEL_WARNING_CLASSES", _parse_int_list, (7, 42, 43, 57)),
    "queue_capacity": ("SKEL_QUEUE_CAPACITY", int, 64),
    "overlay": ("SKEL_OVERLAY", _parse_bool, True),
    "paced": ("SKEL_PACED", _parse_bool, True),
    "live_mode": ("SKEL_LIVE_MODE", _parse_bool, False),
    "alert_pre_s": ("SKEL_ALERT_PRE_S", float, 3.0),
    "alert_post_s": ("SKEL_ALERT_POST_S", float, 2.0),
    "alert_cooldown_s": ("SKEL_ALERT_COOLDOWN_S", float, 5.0),
    "classify_workers": ("SKEL_CLASSIFY_WORKERS", int, 0),
    "classifier": ("SKEL_CLASSIFIER", str, "mock"),          # mock | external
    "classifier_endpoint": ("SKEL_CLASSIFIER_ENDPOINT", str, ""),
    "lifter": ("SKEL_LIFTER", str, "pseudo3d"),              # pseudo3d | external
    "lifter_endpoint": ("SKEL_LIFTER_ENDPOINT", str, ""),
}

VLM_KNOBS: dict[str, tuple[str, object, object]] = {
    "chunk_duration_sec": ("VLM_CHUNK_DURATION_SEC", float, 4.0),
    "recent_fps": ("VLM_RECENT_FPS", int, 6),
    "history_max_sec": ("VLM_HISTORY_MAX_SEC", float, 10.0),
    "history_fps": ("VLM_HISTORY_FPS", int, 1),
    "target_max_dim": ("VLM_TARGET_MAX_DIM", int, 720),
    "min_dim": ("VLM_MIN_DIM", int, 420),
    "max_tokens": ("VLM_MAX_TOKENS", int, 10024),
    "temperature": ("VLM_TEMPERATURE", float, 0.4),
    "top_p": ("VLM_TOP_P", float, 0.6),
    "dual_server_mode": ("VLM_DUAL_SERVER_MODE", _parse_bool, False),
    "endpoints": ("VLM_ENDPOINTS", _parse_str_list, ("http://127.0.0.1:8000",)),
    "memory_loop": ("VLM_MEMORY_LOOP", _parse_bool, True),
    "scene_profile": ("VLM_SCENE_PROFILE", str, "generic"),
    "paced": ("VLM_PACED", _parse_bool, True),
    "model": ("VLM_MODEL", str, "vision-chat"),
    "request_timeout_s": ("VLM_REQUEST_TIMEOUT_S", float, 30.0),
}

SERVICE_KNOBS: dict[str, tuple[str, object, object]] = {
    "storage_root": ("EDGEWATCH_STORAGE_ROOT", str, "edgewatch-data"),
    "host": ("EDGEWATCH_HOST", str, "127.0.0.1"),
    "port": ("EDGEWATCH_PORT", int, 8080),
    "frontend_dist": ("EDGEWATCH_FRONTEND_DIST", str, ""),
}


@dataclass(frozen=True)
class AppConfig:
    skel: dict = field(default_factory=dict)
    vlm: dict = field(default_factory=dict)
    service: dict = field(default_factory=dict)


def _resolve(knobs: dict, section: dict, env) -> dict:
    out = {}
    for name, (env_var, parse, default) in knobs.items():
        if env_var in env:
            out[name] = parse(env[env_var])
        elif name in section:
            out[name] = parse(section[name])
        else:
            out[name] = default
    return out


def load_config(file_path: str | None = None, env=None) -> AppConfig:
    env = os.environ if env is None else env
    file_path = file_path or env.get(CONFIG_FILE_ENV)
    sections = {"skel": {}, "vlm": {}, "service": {}}
    if file_path:
        raw = json.loads(Path(file_path).read_text(encoding="utf-8"))
        for key in sections:
            section = raw.get(key, {})
            if not isinstance(section, dict):
                raise ValueError(f"config section {key!r} must be an object")
            sections[key] = section
    return AppConfig(
        skel=_resolve(SKEL_KNOBS, sections["skel"], env),
        vlm=_resolve(VLM_KNOBS, sections["vlm"], env),
        service=_resolve(SERVICE_KNOBS, sections["service"], env),
    )


def build_pipeline_config(skel: dict, alert_dir: str | None = None):
    """Materialize runtime PipelineConfig from the resolved skel knobs."""
    from ..runtime.pipeline import PipelineConfig

    classifier = ClassifierHandle(
        kind=(ClassifierKind.EXTERNAL if skel["classifier"] == "external"
              else ClassifierKind.MOCK_KINEMATIC),
        endpoint=skel["classifier_endpoint"],
    )
    lifter = LifterHandle(
        kind=(LifterKind.EXTERNAL if skel["lifter"] == "external"
              else LifterKind.PSEUDO_3D),
        endpoint=skel["lifter_endpoint"],
    )
    return PipelineConfig(
        tracker=TrackerConfig(
            det_conf_floor=skel["yolo_confidence"],
            high_score_thresh=skel["high_score_thresh"],
            nms_iou=skel["iou"],
            lost_retention_frames=skel["loss_horizon"],
        ),
        assembly=AssemblyConfig(
            clip_len=skel["clip_len"],
            clip_stride=skel["clip_stride"],
            loss_horizon=skel["loss_horizon"],
            pair_distance=skel["pair_distance"],
            max_persons=skel["max_persons"],
        ),
        risk=RiskConfig(
            danger_classes=frozenset(skel["danger_classes"]),
            danger_threshold=skel["danger_threshold"],
            warning_classes=frozenset(skel["warning_classes"]),
            warning_threshold=skel["warning_threshold"],
        ),
        classifier=classifier,
        lifter=lifter,
        queue_capacity=skel["queue_capacity"],
        live_mode=skel["live_mode"],
        paced=skel["paced"],
        overlay_enabled=skel["overlay"],
        alert_pre_s=skel["alert_pre_s"],
        alert_post_s=skel["alert_post_s"],
        alert_cooldown_s=skel["alert_cooldown_s"],
        alert_dir=alert_dir,
        classify_workers=skel["classify_workers"],
    )


def build_vlm_config(vlm: dict) -> VlmConfig:
    return VlmConfig(
        chunk_duration_sec=vlm["chunk_duration_sec"],
        recent_fps=vlm["recent_fps"],
        history_max_sec=vlm["history_max_sec"],
        history_fps=vlm["history_fps"],
        target_max_dim=vlm["target_max_dim"],
        min_dim=vlm["min_dim"],
        max_tokens=vlm["max_tokens"],
        temperature=vlm["temperature"],
        top_p=vlm["top_p"],
        dual_server_mode=vlm["dual_server_mode"],
        endpoints=tuple(vlm["endpoints"]),
        memory_loop=vlm["memory_loop"],
        scene_profile=SceneProfile(vlm["scene_profile"]),
        model=vlm["model"],
        request_timeout_s=vlm["request_timeout_s"],
    )
