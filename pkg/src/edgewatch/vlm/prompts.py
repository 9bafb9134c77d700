"""Prompt assembly: scene-profile system text, ordered frame blocks,
one-step narrative memory, and the machine-readable verdict instruction.

Scene profiles tune what counts as dangerous in plain language; that is
the whole deployment story, no retraining.  The park profile deliberately
carries no vehicle clause.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass

from .config import SceneProfile, VlmConfig
from .sampling import ChunkSample

_BASE_RULES = (
    "You are a continuous safety monitor watching a camera feed. "
    "Assess the risk level of the scene from the frames provided. "
    "Levels: SAFE (normal activity), WARNING (a person may need help or "
    "the situation is degrading: falls, stumbling, medical distress, "
    "suspicious loitering), DANGER (immediate threat: fighting, weapons, "
    "fire, a person collapsed and unresponsive)."
)

PROFILE_CRITERIA: dict[SceneProfile, str] = {
    SceneProfile.INDOOR: (
        "Indoor facility. Watch for falls, fights, medical collapse, "
        "intrusion outside opening hours, smoke or fire."
    ),
    SceneProfile.OUTDOOR_INTERSECTION: (
        "Road intersection. Watch for vehicle crashes, accidents, "
        "collisions with pedestrians or cyclists, vehicles mounting the "
        "kerb, fights, and people lying on the roadway."
    ),
    SceneProfile.OUTDOOR_PARK: (
        "Public park, pedestrians only. Watch for fights, falls, medical "
        "emergencies, harassment, and unattended children near water."
    ),
    SceneProfile.GENERIC: (
        "General scene. Watch for violence, falls, medical emergencies, "
        "fire, and any situation where a person appears to be in danger."
    ),
}

_RESPONSE_FORMAT = (
    'Respond with exactly one JSON object and nothing else: '
    '{"level": "SAFE" | "WARNING" | "DANGER", "summary": "<one or two '
    'sentences describing the current moment>"}'
)

_MEMORY_OPEN = "=== PREVIOUS MOMENT SUMMARY ==="
_MEMORY_CLOSE = "=== END PREVIOUS MOMENT ==="


@dataclass(frozen=True)
class PromptPayload:
    chunk_index: int
    messages: tuple[dict, ...]

    def texts(self) -> list[str]:
        """All text parts, in payload order (test helper)."""
        out = []
        for msg in self.messages:
            content = msg["content"]
            if isinstance(content, str):
                out.append(content)
                continue
            for part in content:
                if part.get("type") == "text":
                    out.append(part["text"])
        return out

    def image_count(self) -> int:
        n = 0
        for msg in self.messages:
            if isinstance(msg["content"], list):
                n += sum(1 for p in msg["content"] if p.get("type") == "image_url")
        return n


def _image_part(png: bytes) -> dict:
    b64 = base64.b64encode(png).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}}


def build_prompt(
    chunk: ChunkSample,
    previous_summary: str | None,
    cfg: VlmConfig,
) -> PromptPayload:
    system_text = f"{_BASE_RULES}\n{PROFILE_CRITERIA[cfg.scene_profile]}"

    content: list[dict] = []
    if chunk.context_frames:
        content.append({
            "type": "text",
            "text": (
                f"Context stream: {len(chunk.context_frames)} frames at "
                f"{cfg.history_fps} FPS preceding the current window, oldest first."
            ),
        })
        content.extend(_image_part(png) for png in chunk.context_frames)
    content.append({
        "type": "text",
        "text": (
            f"Action stream: {len(chunk.action_frames)} frames at "
            f"{cfg.recent_fps} FPS covering the last "
            f"{cfg.chunk_duration_sec:g} seconds, oldest first."
        ),
    })
    content.extend(_image_part(png) for png in chunk.action_frames)

    if cfg.memory_loop and previous_summary:
        content.append({
            "type": "text",
            "text": f"{_MEMORY_OPEN}\n{previous_summary}\n{_MEMORY_CLOSE}",
        })
    content.append({"type": "text", "text": _RESPONSE_FORMAT})

    return PromptPayload(
        chunk_index=chunk.chunk_index,
        messages=(
            {"role": "system", "content": system_text},
            {"role": "user", "content": content},
        ),
    )
