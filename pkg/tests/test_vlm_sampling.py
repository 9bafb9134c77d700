"""Resize policy and dual-stream chunk sampling."""

from __future__ import annotations

import io

import pytest
from PIL import Image

from edgewatch.vlm.config import VlmConfig
from edgewatch.vlm.sampling import (
    InsufficientHistoryError,
    StampedFrame,
    resize_png,
    resize_policy,
    sample_chunk,
)

CFG = VlmConfig()


def make_png(w: int, h: int, color=(10, 20, 30)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (w, h), color).save(buf, format="PNG")
    return buf.getvalue()


def history_30fps(duration_ms: int) -> tuple[list[StampedFrame], dict[bytes, int]]:
    """Timestamped tiny frames; each PNG is unique so samples map back to
    their source timestamp."""
    frames = []
    by_png = {}
    for i in range(0, duration_ms * 30 // 1000 + 1):
        ts = round(i * 1000 / 30)
        png = make_png(4, 2, (i % 256, i // 256, 7))
        frames.append(StampedFrame(ts, png))
        by_png[png] = ts
    return frames, by_png


class TestResizePolicy:
    @pytest.mark.parametrize("size,expected", [
        ((1280, 720), (747, 420)),   # max-dim cap underflows, min-dim rescue
        ((720, 1280), (420, 747)),   # portrait mirror
        ((1440, 1080), (720, 540)),  # plain max-dim cap
        ((1920, 1440), (720, 540)),
        ((640, 480), (640, 480)),    # already inside the bound
        ((720, 720), (720, 720)),
        ((100, 50), (100, 50)),      # never upscale
        ((2000, 100), (2000, 100)),  # rescue would upscale; keep original
        ((721, 420), (721, 420)),    # rescue scale hits 1.0 exactly
        ((1000, 421), (998, 420)),   # rescue shrinks but stays above the cap
    ])
    def test_table(self, size, expected):
        assert resize_policy(*size, CFG) == expected

    def test_min_dim_exact_after_rescue(self):
        w, h = resize_policy(1280, 720, CFG)
        assert min(w, h) == CFG.min_dim

    def test_invalid_size_raises(self):
        with pytest.raises(ValueError):
            resize_policy(0, 100, CFG)
        with pytest.raises(ValueError):
            resize_policy(100, -1, CFG)

    def test_resize_png_applies_policy(self):
        out = resize_png(make_png(1280, 720), CFG)
        img = Image.open(io.BytesIO(out))
        assert (img.width, img.height) == (747, 420)

    def test_resize_png_passthrough_is_byte_identical(self):
        src = make_png(640, 480)
        assert resize_png(src, CFG) is src


class TestSampleChunk:
    def test_exact_action_budget(self):
        history, _ = history_30fps(4000)
        chunk = sample_chunk(history, 4000, 0, CFG)
        assert len(chunk.action_frames) == 24
        assert len(set(chunk.action_frames)) == 24  # 30 fps source: all distinct
        assert chunk.time_span == (0, 4000)

    @pytest.mark.parametrize("now_ms,expected_context", [
        (4000, 0),    # no history before the window yet
        (8000, 4),    # grid at 3000,2000,1000,0
        (12000, 6),   # budget-capped: (10 - 4) s at 1 fps
        (60000, 6),
    ])
    def test_context_count_grows_then_caps(self, now_ms, expected_context):
        history, _ = history_30fps(now_ms)
        chunk = sample_chunk(history, now_ms, 0, CFG)
        assert len(chunk.context_frames) == expected_context

    def test_streams_are_disjoint_and_context_oldest_first(self):
        history, by_png = history_30fps(12000)
        chunk = sample_chunk(history, 12000, 2, CFG)
        action_ts = [by_png[p] for p in chunk.action_frames]
        context_ts = [by_png[p] for p in chunk.context_frames]
        assert action_ts == sorted(action_ts)
        assert context_ts == sorted(context_ts)
        assert max(context_ts) < 12000 - 4000
        assert min(action_ts) >= 12000 - 4000 - 20  # nearest-frame slack
        assert chunk.chunk_index == 2

    def test_action_grid_endpoints(self):
        history, by_png = history_30fps(8000)
        chunk = sample_chunk(history, 8000, 0, CFG)
        assert by_png[chunk.action_frames[-1]] == 8000
        # first grid point is now - 23/6 s; nearest 30 fps frame within 17 ms
        first = by_png[chunk.action_frames[0]]
        assert abs(first - (8000 - 23 * 1000 / 6)) <= 17

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistoryError):
            sample_chunk([], 4000, 0, CFG)
        history, _ = history_30fps(3900)
        with pytest.raises(InsufficientHistoryError):
            sample_chunk(history, 3900, 0, CFG)

    def test_exactly_one_chunk_of_history_suffices(self):
        history, _ = history_30fps(4000)
        sample_chunk(history, 4000, 0, CFG)  # must not raise

    def test_source_at_exactly_recent_fps(self):
        frames = [
            StampedFrame(round(i * 1000 / 6), make_png(4, 2, (i, 0, 0)))
            for i in range(25)
        ]
        chunk = sample_chunk(frames, 4000, 0, CFG)
        assert len(chunk.action_frames) == 24
        assert len(set(chunk.action_frames)) == 24

    def test_sampled_frames_pass_resize_policy(self):
        frames = [
            StampedFrame(round(i * 1000 / 6), make_png(1280, 720, (i, 0, 0)))
            for i in range(25)
        ]
        chunk = sample_chunk(frames, 4000, 0, CFG)
        img = Image.open(io.BytesIO(chunk.action_frames[0]))
        assert (img.width, img.height) == (747, 420)
