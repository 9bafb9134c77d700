"""Alert clip artifacts: a codec-free container of encoded overlay frames.

Byte layout (all integers little-endian uint32):

    offset 0   magic "EWCLIP01" (8 bytes)
    offset 8   metadata_len
    offset 12  metadata JSON (UTF-8), carries frame timing + alert context
    then, per frame: frame_len followed by frame_len bytes of PNG

The thumbnail is the single frame with the highest recorded risk inside
the captured span (ties resolve to the earliest frame).
"""

from __future__ import annotations

import json
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

MAGIC = b"EWCLIP01"
_U32 = struct.Struct("<I")


class ClipFormatError(ValueError):
    pass


def write_clip(path: str | Path, frames: list[bytes], metadata: dict) -> None:
    meta = json.dumps(metadata, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(len(meta)))
        fh.write(meta)
        for frame in frames:
            fh.write(_U32.pack(len(frame)))
            fh.write(frame)


def read_clip(path: str | Path) -> tuple[dict, list[bytes]]:
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise ClipFormatError(f"bad magic {blob[:8]!r}")
    (meta_len,) = _U32.unpack_from(blob, 8)
    pos = 12
    try:
        metadata = json.loads(blob[pos:pos + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ClipFormatError(f"bad metadata block: {exc}") from exc
    pos += meta_len
    frames = []
    while pos < len(blob):
        if pos + 4 > len(blob):
            raise ClipFormatError("truncated frame length field")
        (n,) = _U32.unpack_from(blob, pos)
        pos += 4
        if pos + n > len(blob):
            raise ClipFormatError("truncated frame payload")
        frames.append(blob[pos:pos + n])
        pos += n
    return metadata, frames


@dataclass
class RingEntry:
    frame_index: int
    timestamp_ms: int
    png: bytes
    risk: float = 0.0  # highest danger mass attributed to this frame so far


@dataclass
class FrameRing:
    """Bounded history of rendered frames for alert capture."""

    capacity: int = 300
    entries: deque = field(default_factory=deque)

    def push(self, frame_index: int, timestamp_ms: int, png: bytes) -> None:
        self.entries.append(RingEntry(frame_index, timestamp_ms, png))
        while len(self.entries) > self.capacity:
            self.entries.popleft()

    def mark_risk(self, start: int, end: int, mass: float) -> None:
        for e in self.entries:
            if start <= e.frame_index <= end:
                e.risk = max(e.risk, mass)

    def slice(self, start: int, end: int) -> list[RingEntry]:
        return [e for e in self.entries if start <= e.frame_index <= end]

    def span_for_ts(self, start_ms: int, end_ms: int) -> tuple[int, int] | None:
        """Frame-index span of entries with timestamps in [start_ms, end_ms]."""
        hits = [e.frame_index for e in self.entries
                if start_ms <= e.timestamp_ms <= end_ms]
        if not hits:
            return None
        return (hits[0], hits[-1])

    def index_nearest_ts(self, ts_ms: int) -> int | None:
        if not self.entries:
            return None
        best = min(self.entries, key=lambda e: abs(e.timestamp_ms - ts_ms))
        return best.frame_index

    @property
    def oldest_index(self) -> int | None:
        return self.entries[0].frame_index if self.entries else None

    @property
    def newest_index(self) -> int | None:
        return self.entries[-1].frame_index if self.entries else None

    @property
    def newest_ts(self) -> int | None:
        return self.entries[-1].timestamp_ms if self.entries else None


def capture_alert_clip(
    ring: FrameRing,
    span: tuple[int, int],
    out_dir: str | Path,
    basename: str,
    context: dict | None = None,
) -> tuple[Path, Path, bool]:
    """Write clip + thumbnail for [span] from the ring; returns
    (clip_path, thumbnail_path, truncated).

    truncated is set (and recorded in metadata) when the ring no longer
    covers the requested start, or the stream ended before the requested
    end.
    """
    start, end = span
    entries = ring.slice(start, end)
    if not entries:
        raise ValueError(f"ring holds nothing in span {span}")
    truncated = (
        ring.oldest_index is not None and start < ring.oldest_index
    ) or (
        ring.newest_index is not None and end > ring.newest_index
    )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clip_path = out_dir / f"{basename}.ewclip"
    thumb_path = out_dir / f"{basename}.png"

    peak = max(entries, key=lambda e: (e.risk, -e.frame_index))
    metadata = {
        "format": MAGIC.decode("ascii"),
        "requested_span": [start, end],
        "actual_span": [entries[0].frame_index, entries[-1].frame_index],
        "frame_indices": [e.frame_index for e in entries],
        "timestamps_ms": [e.timestamp_ms for e in entries],
        "truncated": truncated,
        "thumbnail_frame": peak.frame_index,
    }
    if context:
        metadata.update(context)
    write_clip(clip_path, [e.png for e in entries], metadata)
    thumb_path.write_bytes(peak.png)
    return clip_path, thumb_path, truncated
