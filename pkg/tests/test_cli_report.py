"""CLI commands and the metrics/figure report path."""

from __future__ import annotations

import csv
import json

import pytest
from click.testing import CliRunner

from edgewatch.cli import main
from edgewatch.runtime.metrics import MetricsAccumulator
from edgewatch.report import write_report


@pytest.fixture
def runner():
    return CliRunner()


class TestGenFixture:
    def test_deterministic_bytes(self, runner, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            res = runner.invoke(main, [
                "gen-fixture", "two_person_punch", "--seed", "5",
                "--frames", "40", "--out", str(out),
            ])
            assert res.exit_code == 0, res.output
            assert "wrote 40 frames" in res.output
        assert a.read_bytes() == b.read_bytes()

    def test_fixture_is_loadable(self, runner, tmp_path):
        from edgewatch.runtime.sources import load_replay

        out = tmp_path / "f.jsonl"
        res = runner.invoke(main, [
            "gen-fixture", "crossing_occlusion", "--gap", "10",
            "--frames", "60", "--out", str(out),
        ])
        assert res.exit_code == 0, res.output
        assert len(load_replay(out)) == 60

    def test_unknown_scenario_rejected(self, runner, tmp_path):
        res = runner.invoke(main, [
            "gen-fixture", "no_such", "--out", str(tmp_path / "x.jsonl"),
        ])
        assert res.exit_code != 0


class TestReplay:
    def test_report_json_on_stdout(self, runner, tmp_path):
        res = runner.invoke(main, [
            "replay", "scenario:fall?seed=7&frames=200",
            "--alert-dir", str(tmp_path / "alerts"),
        ], env={"SKEL_PACED": "0"})
        assert res.exit_code == 0, res.output
        core = json.loads(res.output)
        assert core["source"] == "scenario:fall?seed=7&frames=200"
        assert core["frames_in"] == 200
        assert core["alerts_by_level"]["WARNING"] >= 1
        assert core["alerts"][0]["top_label"].startswith("A43")
        assert {"level", "created_ts_ms", "frame_span", "track_ids",
                "danger_mass", "warning_mass", "top_label"} <= set(core["alerts"][0])

    def test_replay_of_generated_file(self, runner, tmp_path):
        fixture = tmp_path / "f.jsonl"
        runner.invoke(main, [
            "gen-fixture", "single_static", "--frames", "130", "--out", str(fixture),
        ])
        res = runner.invoke(main, ["replay", str(fixture)], env={"SKEL_PACED": "0"})
        assert res.exit_code == 0, res.output
        core = json.loads(res.output)
        assert core["frames_in"] == 130
        assert core["clips_emitted"] == 2
        assert core["alerts"] == []

    def test_bad_source_exits_nonzero(self, runner):
        res = runner.invoke(main, ["replay", "rtsp://nope"])
        assert res.exit_code != 0


class TestBench:
    def test_snapshot_json(self, runner):
        res = runner.invoke(main, [
            "bench", "single_static", "--frames", "130",
        ])
        assert res.exit_code == 0, res.output
        snap = json.loads(res.output)
        assert snap["frames_in"] == 130
        assert snap["efps"] > 0
        assert set(snap["stages"]) == {"track", "assemble", "preprocess", "classify"}
        for stage in snap["stages"].values():
            assert stage["samples"] >= 0


class TestReportDir:
    def test_replay_writes_artifacts(self, runner, tmp_path):
        report_dir = tmp_path / "report"
        res = runner.invoke(main, [
            "replay", "scenario:two_person_punch?seed=7&frames=260",
            "--alert-dir", str(tmp_path / "alerts"),
            "--report-dir", str(report_dir),
        ], env={"SKEL_PACED": "0"})
        assert res.exit_code == 0, res.output
        assert (report_dir / "metrics.csv").is_file()
        assert (report_dir / "latency_breakdown.png").is_file()
        assert (report_dir / "run_counters.png").is_file()
        for png in ("latency_breakdown.png", "run_counters.png"):
            assert (report_dir / png).read_bytes()[:4] == b"\x89PNG"

    def test_metrics_csv_contents(self, runner, tmp_path):
        report_dir = tmp_path / "report"
        runner.invoke(main, [
            "replay", "scenario:single_static?seed=7&frames=130",
            "--alert-dir", str(tmp_path / "alerts"),
            "--report-dir", str(report_dir),
        ], env={"SKEL_PACED": "0"})
        with open(report_dir / "metrics.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {"section", "name", "value"} == set(rows[0])
        by_key = {(r["section"], r["name"]): r["value"] for r in rows}
        assert by_key[("counters", "frames_in")] == "130"
        assert by_key[("counters", "clips_emitted")] == "2"
        assert ("run", "efps") in by_key
        assert ("stage_track", "mean_ms") in by_key
        clip_rows = [r for r in rows if r["section"].startswith("clip_")]
        assert clip_rows  # per-clip latency decomposition present


class TestWriteReportDirect:
    def test_handles_empty_run(self, tmp_path):
        snap = MetricsAccumulator().snapshot()
        paths = write_report(tmp_path, snap, "empty")
        assert [p.name for p in paths] == [
            "metrics.csv", "latency_breakdown.png", "run_counters.png"
        ]
        for p in paths:
            assert p.stat().st_size > 0
