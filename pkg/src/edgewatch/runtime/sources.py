"""Frame sources: pose replay files, synthetic scenarios, and the
(unsupported here) camera capability.

The pose replay file is the primary test source.  Format: JSON Lines, one
object per frame:

    {"frame": int, "ts_ms": int,
     "detections": [{"box": [cx, cy, w, h], "score": float,
                     "kpts": [[x, y, conf] x 17]}]}

Descriptors: a path to a .jsonl file; "scenario:<name>" with optional
"?seed=<int>&<param>=<value>" query; anything rtsp/camera-like maps to the
optional camera capability, absent in this build.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator
from urllib.parse import parse_qsl

from ..tracking import Detection
from .scenarios import FPS as SCENARIO_FPS
from .scenarios import generate


class SourceKind(enum.Enum):
    POSE_REPLAY = "pose_replay"
    SYNTHETIC_SCENARIO = "synthetic_scenario"
    CAMERA_RTSP = "camera_rtsp"


class SourceError(ValueError):
    """Descriptor cannot be opened (missing file, bad scenario, ...)."""


class UnsupportedSourceError(SourceError):
    """Descriptor needs a capability this build does not ship."""


class MalformedReplayError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"malformed JSONL line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass(frozen=True)
class PoseFrame:
    frame_index: int
    timestamp_ms: int
    detections: tuple[Detection, ...]
    image: bytes | None = None


def parse_replay_record(record: dict, lineno: int = 0) -> PoseFrame:
    try:
        frame = int(record["frame"])
        ts = int(record["ts_ms"])
        dets = tuple(Detection.from_record(d) for d in record["detections"])
    except MalformedReplayError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReplayError(lineno, str(exc)) from exc
    return PoseFrame(frame, ts, dets)


def parse_replay_line(line: str, lineno: int) -> PoseFrame:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedReplayError(lineno, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise MalformedReplayError(lineno, "frame record must be a JSON object")
    return parse_replay_record(record, lineno)


def load_replay(path: str | Path) -> list[PoseFrame]:
    """Parse a whole replay file; enforces strictly increasing frame_index."""
    frames: list[PoseFrame] = []
    last = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            pf = parse_replay_line(line, lineno)
            if last is not None and pf.frame_index <= last:
                raise MalformedReplayError(
                    lineno, f"frame_index {pf.frame_index} not after {last}"
                )
            frames.append(pf)
            last = pf.frame_index
    return frames


def write_replay(path: str | Path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


@dataclass
class FrameSource:
    """A resolved source: kind + descriptor + an iterable of PoseFrames.

    frames() optionally paces delivery to nominal_fps wall time (live
    emulation); unpaced iteration is the benchmark mode.
    """

    kind: SourceKind
    descriptor: str
    nominal_fps: float
    _frames: list[PoseFrame] = field(repr=False, default_factory=list)

    def __len__(self) -> int:
        return len(self._frames)

    def frames(self, paced: bool = False) -> Iterator[PoseFrame]:
        if not paced:
            yield from self._frames
            return
        start = time.monotonic()
        t0 = self._frames[0].timestamp_ms if self._frames else 0
        for pf in self._frames:
            due = start + (pf.timestamp_ms - t0) / 1000.0
            delay = due - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            yield pf


def open_source(descriptor: str, nominal_fps: float | None = None) -> FrameSource:
    """Resolve a descriptor string to a FrameSource.

    Raises UnsupportedSourceError for camera/RTSP descriptors and
    SourceError for anything else unresolvable.
    """
    descriptor = str(descriptor).strip()
    if not descriptor:
        raise SourceError("empty source descriptor")

    lowered = descriptor.lower()
    if lowered.startswith(("rtsp://", "rtmp://", "camera:")) or lowered.isdigit():
        raise UnsupportedSourceError(
            f"camera/RTSP capture is not available in this build: {descriptor!r}"
        )

    if lowered.startswith("scenario:"):
        spec = descriptor[len("scenario:"):]
        name, _, query = spec.partition("?")
        params: dict = dict(parse_qsl(query))
        seed = int(params.pop("seed", 0))
        for key in list(params):
            try:
                params[key] = int(params[key])
            except ValueError:
                pass  # string params (e.g. mode) pass through
        try:
            records = generate(name, seed=seed, **params)
        except (KeyError, TypeError, ValueError) as exc:
            raise SourceError(f"bad scenario descriptor {descriptor!r}: {exc}") from exc
        frames = [parse_replay_record(r, i + 1) for i, r in enumerate(records)]
        return FrameSource(
            SourceKind.SYNTHETIC_SCENARIO, descriptor,
            nominal_fps or SCENARIO_FPS, frames,
        )

    path = Path(descriptor)
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        if not path.is_file():
            raise SourceError(f"replay file not found: {descriptor}")
        frames = load_replay(path)
        fps = nominal_fps
        if fps is None:
            fps = _infer_fps(frames)
        return FrameSource(SourceKind.POSE_REPLAY, descriptor, fps, frames)

    raise SourceError(f"unresolvable source descriptor: {descriptor!r}")


def _infer_fps(frames: list[PoseFrame]) -> float:
    if len(frames) < 2:
        return float(SCENARIO_FPS)
    span_ms = frames[-1].timestamp_ms - frames[0].timestamp_ms
    if span_ms <= 0:
        return float(SCENARIO_FPS)
    return (len(frames) - 1) * 1000.0 / span_ms
