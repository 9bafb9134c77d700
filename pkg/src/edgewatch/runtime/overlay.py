"""Deterministic skeleton overlay rendering.

Draws onto a blank canvas (or a supplied background) with PIL primitives
only: discs for joints, fixed limb segments, track id above the box, and
the latest risk label color-coded by the shared style tokens.  No
antialiasing and a bitmap font, so identical inputs give identical PNG
bytes (golden-hash testable).
"""

from __future__ import annotations

import io

from PIL import Image, ImageDraw

from ..geometry.layouts import COCO_LIMBS

# Shared level -> color tokens (mirrored by the dashboard styles).
STYLE_TOKENS = {
    "DANGER": "#d32f2f",   # red
    "WARNING": "#ffb300",  # amber
    "SAFE": "#2e7d32",     # green
}
_BONE = "#4dd0e1"
_JOINT = "#ffffff"
_HUD = "#c0c0c0"
_JOINT_R = 3
_CONF_FLOOR = 0.05


def _level_name(label) -> str:
    return getattr(label, "value", None) or str(label)


def render_overlay(
    frame,
    tracks,
    labels=None,
    size: tuple[int, int] = (640, 480),
    background: bytes | None = None,
) -> bytes:
    """Render one frame to PNG bytes.

    tracks: [(track_id, Detection)]; labels: {track_id: level}.  Levels may
    be RiskLevel values or plain strings.
    """
    labels = labels or {}
    if background is not None:
        img = Image.open(io.BytesIO(background)).convert("RGB")
    else:
        img = Image.new("RGB", size, "#101418")
    draw = ImageDraw.Draw(img)

    for track_id, det in tracks:
        pose = det.pose
        for a, b in COCO_LIMBS:
            if pose[a, 3] > _CONF_FLOOR and pose[b, 3] > _CONF_FLOOR:
                draw.line(
                    [(pose[a, 0], pose[a, 1]), (pose[b, 0], pose[b, 1])],
                    fill=_BONE, width=2,
                )
        for j in range(pose.shape[0]):
            if pose[j, 3] > _CONF_FLOOR:
                x, y = pose[j, 0], pose[j, 1]
                draw.ellipse(
                    [x - _JOINT_R, y - _JOINT_R, x + _JOINT_R, y + _JOINT_R],
                    fill=_JOINT,
                )
        cx, cy, w, h = det.box
        top = (cx - w / 2.0, cy - h / 2.0)
        level = _level_name(labels.get(track_id, "SAFE"))
        color = STYLE_TOKENS.get(level, STYLE_TOKENS["SAFE"])
        draw.rectangle(
            [top[0], top[1], cx + w / 2.0, cy + h / 2.0],
            outline=color, width=2,
        )
        draw.text((top[0] + 2, top[1] - 12), f"#{track_id} {level}", fill=color)

    hud = f"frame {frame.frame_index}  t={frame.timestamp_ms} ms  persons={len(tracks)}"
    draw.text((6, img.height - 14), hud, fill=_HUD)

    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()
