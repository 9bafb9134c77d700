"""Skeleton buffering, emission cadence, and pair assembly."""

from __future__ import annotations

import numpy as np
import pytest

from edgewatch.assembly import (
    AssemblyConfig,
    BufferManager,
    EmittedClip,
    centroid,
    make_samples,
)

from .conftest import box_detection, grid_pose


def _feed(manager: BufferManager, track_id: int, n: int, cx: float = 100.0):
    """Push n consecutive frames for one track; returns all emissions."""
    emitted = []
    for f in range(n):
        emitted += manager.ingest_frame([(track_id, box_detection(cx, 200.0))], f)
    return emitted


@pytest.mark.parametrize("n, expected", [(99, 0), (100, 1), (129, 1), (130, 2), (430, 12)])
def test_emission_count_formula(n, expected):
    # emissions = 1 + floor((N - clip_len) / stride) once N >= clip_len
    manager = BufferManager(AssemblyConfig())
    emitted = _feed(manager, 1, n)
    assert len(emitted) == expected


def test_first_emission_at_window_fill():
    manager = BufferManager(AssemblyConfig())
    emitted = _feed(manager, 1, 100)
    (clip,) = emitted
    assert clip.emit_frame == 99
    assert clip.frame_span == (0, 99)
    assert clip.poses.shape == (100, 17, 4)


def test_emission_stride_spacing():
    manager = BufferManager(AssemblyConfig())
    emitted = _feed(manager, 1, 430)
    emit_frames = [c.emit_frame for c in emitted]
    assert emit_frames == [99 + 30 * i for i in range(12)]
    # windows slide: each next clip starts 30 frames later
    assert [c.frame_span[0] for c in emitted] == [30 * i for i in range(12)]


def test_gap_slows_emission_without_padding():
    manager = BufferManager(AssemblyConfig())
    emitted = []
    frame = 0
    for _ in range(60):
        emitted += manager.ingest_frame([(1, box_detection(100, 200))], frame)
        frame += 1
    for _ in range(20):  # 20 missed ticks, inside the horizon
        emitted += manager.ingest_frame([], frame)
        manager.prune_lost(frame)
        frame += 1
    assert 1 in manager.buffers
    for _ in range(40):
        emitted += manager.ingest_frame([(1, box_detection(100, 200))], frame)
        frame += 1
    (clip,) = emitted
    # 100 real frames collected, the gap only delayed the fill
    assert len(clip.frame_indices) == 100
    assert clip.emit_frame == 119


def test_prune_respects_loss_horizon_boundary():
    cfg = AssemblyConfig(loss_horizon=60)
    manager = BufferManager(cfg)
    manager.ingest_frame([(1, box_detection(100, 200))], 0)
    for f in range(1, 61):
        manager.ingest_frame([], f)
    assert manager.prune_lost(60) == []          # streak == horizon: keep
    manager.ingest_frame([], 61)
    assert manager.prune_lost(61) == [1]         # streak > horizon: drop


def test_buffer_rejects_non_increasing_frames():
    manager = BufferManager(AssemblyConfig())
    manager.ingest_frame([(1, box_detection(100, 200))], 5)
    with pytest.raises(ValueError):
        manager.ingest_frame([(1, box_detection(100, 200))], 5)


def test_max_persons_cap_drops_lowest_score_first():
    cfg = AssemblyConfig(max_persons=2)
    manager = BufferManager(cfg)
    matches = [
        (1, box_detection(100, 200, score=0.5)),
        (2, box_detection(300, 200, score=0.9)),
        (3, box_detection(500, 200, score=0.7)),
    ]
    manager.ingest_frame(matches, 0)
    assert sorted(manager.buffers) == [2, 3]


def _clip(track_id: int, cx: float, t: int = 100) -> EmittedClip:
    poses = np.stack([grid_pose(cx, 200.0, spread=10.0) for _ in range(t)])
    return EmittedClip(track_id, list(range(t)), poses, emit_frame=t - 1)


def test_three_tracks_give_six_samples_without_gating():
    clips = [_clip(1, 100), _clip(2, 200), _clip(3, 560)]
    samples = make_samples(clips, AssemblyConfig(pair_distance=0.0))
    assert len(samples) == 6  # C(3,2) pairs + 3 singles
    pair_ids = sorted(s.track_ids for s in samples if len(s.track_ids) == 2)
    assert pair_ids == [(1, 2), (1, 3), (2, 3)]
    singles = [s for s in samples if len(s.track_ids) == 1]
    for s in singles:
        assert np.array_equal(s.persons[1], np.zeros_like(s.persons[1]))


def test_pair_gating_removes_distant_pairs():
    clips = [_clip(1, 100), _clip(2, 200), _clip(3, 560)]
    samples = make_samples(clips, AssemblyConfig(pair_distance=300.0))
    pair_ids = sorted(s.track_ids for s in samples if len(s.track_ids) == 2)
    # 1-2 are 100 px apart, 2-3 are 360 px, 1-3 are 460 px
    assert pair_ids == [(1, 2)]
    assert len(samples) == 4  # surviving pair + 3 singles


def test_pair_slots_follow_ascending_track_id():
    clips = [_clip(9, 300), _clip(4, 310)]
    samples = make_samples(clips, AssemblyConfig())
    pair = next(s for s in samples if len(s.track_ids) == 2)
    assert pair.track_ids == (4, 9)
    assert np.array_equal(pair.persons[0], clips[1].poses)


def test_centroid_confidence_floor():
    pose = grid_pose(100, 200)
    pose[:, 3] = 0.1  # everything under the floor
    assert centroid(pose, conf_floor=0.3) is None
    pose[5, 3] = 0.9
    cx, cy = centroid(pose, conf_floor=0.3)
    assert (cx, cy) == (pose[5, 0], pose[5, 1])


def test_pair_gating_drops_never_coexisting_clips():
    a = _clip(1, 100)
    b = _clip(2, 200)
    b.poses[:, :, 3] = 0.0  # no centroid can form
    samples = make_samples([a, b], AssemblyConfig(pair_distance=300.0))
    assert all(len(s.track_ids) == 1 for s in samples)
