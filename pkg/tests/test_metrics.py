"""Metrics accumulator, nearest-rank p95, and latency decomposition."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgewatch.runtime.metrics import (
    STAGES,
    ClipLatency,
    MetricsAccumulator,
    nearest_rank_p95,
    zero_snapshot,
)


def p95_oracle(values: list[float]) -> float:
    """Nearest-rank definition, straight from the textbook formula."""
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = math.ceil(0.95 * len(ordered))
    return ordered[max(rank, 1) - 1]


class TestP95:
    @pytest.mark.parametrize("values,expected", [
        ([5.0], 5.0),
        ([1.0, 2.0], 2.0),
        ([3.0, 1.0, 2.0], 3.0),
        (list(map(float, range(1, 21))), 19.0),    # ceil(0.95*20)=19
        (list(map(float, range(1, 101))), 95.0),   # ceil(0.95*100)=95
        (list(map(float, range(1, 102))), 96.0),   # ceil(0.95*101)=96
    ])
    def test_table(self, values, expected):
        assert nearest_rank_p95(values) == expected

    def test_empty(self):
        assert nearest_rank_p95([]) == 0.0

    @given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=200))
    def test_matches_oracle(self, values):
        assert nearest_rank_p95(values) == p95_oracle(values)

    @given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=200))
    def test_result_is_an_observed_value(self, values):
        assert nearest_rank_p95(values) in values


class TestLatencyIdentity:
    def test_end_to_end_is_exact_sum(self):
        lat = ClipLatency(0, buffer_fill_ms=3333.25, inference_ms=41.75)
        assert lat.end_to_end_ms == 3333.25 + 41.75

    def test_snapshot_means_preserve_identity(self):
        acc = MetricsAccumulator()
        acc.clip_latency(0, 3000.0, 40.0)
        acc.clip_latency(1, 1000.0, 60.0)
        snap = acc.snapshot()
        assert snap.buffer_fill_ms_mean == 2000.0
        assert snap.inference_ms_mean == 50.0
        assert snap.end_to_end_ms_mean == 2050.0
        for clip in snap.clip_latencies:
            assert clip.end_to_end_ms == clip.buffer_fill_ms + clip.inference_ms


class TestAccumulator:
    def test_counters(self):
        acc = MetricsAccumulator()
        for _ in range(10):
            acc.frame_in()
        for _ in range(7):
            acc.frame_processed()
        for _ in range(3):
            acc.frame_dropped()
        acc.clip_emitted()
        acc.sample_classified(4)
        acc.classifier_error()
        acc.alert("DANGER")
        acc.alert("DANGER")
        acc.alert("WARNING")
        snap = acc.snapshot()
        assert snap.frames_in == 10
        assert snap.frames_processed == 7
        assert snap.frames_dropped == 3
        assert snap.clips_emitted == 1
        assert snap.samples_classified == 4
        assert snap.classifier_errors == 1
        assert snap.alerts_by_level == {"SAFE": 0, "WARNING": 1, "DANGER": 2}

    def test_stage_stats(self):
        acc = MetricsAccumulator()
        for ms in [1.0, 2.0, 3.0, 10.0]:
            acc.stage("track", ms)
        snap = acc.snapshot()
        st_ = snap.stage_stats["track"]
        assert st_.samples == 4
        assert st_.mean_ms == 4.0
        assert st_.p95_ms == 10.0
        assert snap.stage_stats["classify"].samples == 0

    def test_efps_counts_processed_only(self):
        acc = MetricsAccumulator()
        acc.frame_in()
        acc.frame_dropped()
        snap = acc.snapshot()
        assert snap.efps == 0.0  # nothing fully processed

    def test_queue_depth_probe(self):
        acc = MetricsAccumulator()
        acc.queue_depth_probe = lambda: {"ingest": 3}
        assert acc.snapshot().queue_depths == {"ingest": 3}
        acc.queue_depth_probe = lambda: (_ for _ in ()).throw(RuntimeError)
        assert acc.snapshot().queue_depths == {}

    def test_snapshot_is_isolated_from_later_mutation(self):
        acc = MetricsAccumulator()
        acc.frame_in()
        snap = acc.snapshot()
        acc.frame_in()
        assert snap.frames_in == 1


class TestZeroSnapshot:
    def test_shape(self):
        snap = zero_snapshot()
        d = snap.as_dict()
        assert d["efps"] == 0.0
        assert d["frames_in"] == 0
        assert d["alerts_by_level"] == {"SAFE": 0, "WARNING": 0, "DANGER": 0}
        assert set(d["stages"]) == set(STAGES)
        for s in d["stages"].values():
            assert s == {"mean_ms": 0.0, "p95_ms": 0.0, "samples": 0}

    def test_as_dict_is_json_safe(self):
        import json
        json.dumps(zero_snapshot().as_dict())
