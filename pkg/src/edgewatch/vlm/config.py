"""Semantic-layer configuration.

Defaults follow the deployed profile: 4 s chunks sampled at 6 FPS (24
action frames), a sparse 1 FPS context stream capped at 10 s, 720/420
resize bounds, and deliberately conservative generation parameters.
max_tokens of 10024 is carried over verbatim from that profile even
though it is unusually large; override it if your serving stack rejects
it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class SceneProfile(enum.Enum):
    INDOOR = "indoor"
    OUTDOOR_INTERSECTION = "outdoor_intersection"
    OUTDOOR_PARK = "outdoor_park"
    GENERIC = "generic"


@dataclass(frozen=True)
class VlmConfig:
    chunk_duration_sec: float = 4.0
    recent_fps: int = 6
    history_max_sec: float = 10.0
    history_fps: int = 1
    target_max_dim: int = 720
    min_dim: int = 420
    max_tokens: int = 10024
    temperature: float = 0.4
    top_p: float = 0.6
    dual_server_mode: bool = False
    endpoints: tuple[str, ...] = ("http://127.0.0.1:8000",)
    memory_loop: bool = True
    scene_profile: SceneProfile = SceneProfile.GENERIC
    model: str = "vision-chat"
    request_timeout_s: float = 30.0

    def __post_init__(self):
        frames = self.chunk_duration_sec * self.recent_fps
        if abs(frames - round(frames)) > 1e-9 or frames < 1:
            raise ValueError(
                f"chunk_duration_sec * recent_fps must be a positive integer, got {frames}"
            )
        if self.history_max_sec < self.chunk_duration_sec:
            raise ValueError("history_max_sec must cover at least one chunk")
        if not self.endpoints:
            raise ValueError("at least one endpoint required")
        if self.dual_server_mode and len(self.endpoints) != 2:
            raise ValueError("dual_server_mode requires exactly 2 endpoints")

    @property
    def action_frames_per_chunk(self) -> int:
        return int(round(self.chunk_duration_sec * self.recent_fps))

    @property
    def max_context_frames(self) -> int:
        # Context grid is disjoint from the action window, so the budget is
        # the history span minus the chunk span, at history_fps.
        return int((self.history_max_sec - self.chunk_duration_sec) * self.history_fps)
