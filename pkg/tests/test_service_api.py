"""REST + WebSocket surface of the dual-backend service."""

from __future__ import annotations

import contextlib
import json
import time

import pytest
from fastapi.testclient import TestClient

from edgewatch.runtime.scenarios import generate
from edgewatch.service.app import PREFIXES, create_app
from edgewatch.service.config import (
    SERVICE_KNOBS,
    SKEL_KNOBS,
    VLM_KNOBS,
    _parse_bool,
    _parse_int_list,
    _parse_str_list,
    build_pipeline_config,
    build_vlm_config,
    load_config,
)
from edgewatch.service.store import Backend
from edgewatch.vlm.mock_server import make_mock_vlm_app

SKEL_API = PREFIXES[Backend.SKELETON][0]
SKEL_WS = PREFIXES[Backend.SKELETON][1]
VLM_API = PREFIXES[Backend.VLM][0]

FALL = "scenario:fall?seed=7&frames=200"
PUNCH = "scenario:two_person_punch?seed=7&frames=260"
STATIC_LONG = "scenario:single_static?seed=7&frames=3000"


@pytest.fixture
def client(service_env):
    app = create_app(load_config(env=service_env))
    with TestClient(app) as c:
        yield c


def wait_stopped(client, prefix: str, timeout: float = 60.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        stats = client.get(f"{prefix}/stats").json()
        if not stats["running"]:
            return stats
        time.sleep(0.05)
    raise TimeoutError("session did not stop in time")


def run_to_completion(client, prefix: str, source: str) -> dict:
    resp = client.post(f"{prefix}/stream/start", json={"source": source})
    assert resp.status_code == 200, resp.text
    return wait_stopped(client, prefix)


class TestLifecycle:
    def test_start_stop_cycle(self, client):
        resp = client.post(f"{SKEL_API}/stream/start", json={"source": STATIC_LONG})
        assert resp.status_code == 200
        record = resp.json()
        assert record["backend"] == "skeleton"
        assert record["running"] is True
        assert record["session_id"].startswith("skeleton-")

        dup = client.post(f"{SKEL_API}/stream/start", json={"source": STATIC_LONG})
        assert dup.status_code == 409
        assert dup.json()["error"] == "ALREADY_RUNNING"

        stopped = client.post(f"{SKEL_API}/stream/stop")
        assert stopped.status_code == 200
        assert stopped.json()["running"] is False
        assert stopped.json()["session_id"] == record["session_id"]

        again = client.post(f"{SKEL_API}/stream/stop")
        assert again.status_code == 409
        assert again.json()["error"] == "NOT_RUNNING"

    def test_stop_without_any_start(self, client):
        resp = client.post(f"{VLM_API}/stream/stop")
        assert resp.status_code == 409
        assert resp.json()["error"] == "NOT_RUNNING"
        assert "detail" in resp.json()

    @pytest.mark.parametrize("source", ["", "rtsp://cam/1", "camera:0", "bogus"])
    def test_bad_sources_rejected(self, client, source):
        resp = client.post(f"{SKEL_API}/stream/start", json={"source": source})
        assert resp.status_code == 400
        assert resp.json()["error"] == "BAD_SOURCE"

    def test_replay_exhaustion_autostops(self, client):
        stats = run_to_completion(client, SKEL_API, FALL)
        assert stats["running"] is False
        assert stats["snapshot"]["frames_in"] == 200
        # a fresh session may start afterwards
        resp = client.post(f"{SKEL_API}/stream/start", json={"source": FALL})
        assert resp.status_code == 200
        wait_stopped(client, SKEL_API)


class TestStats:
    def test_zeroed_before_first_start(self, client):
        for prefix in (SKEL_API, VLM_API):
            stats = client.get(f"{prefix}/stats").json()
            assert stats["running"] is False
            assert stats["session"] is None
            snap = stats["snapshot"]
            assert snap["frames_in"] == 0
            assert snap["alerts_by_level"] == {"SAFE": 0, "WARNING": 0, "DANGER": 0}

    def test_frozen_after_completion(self, client):
        stats = run_to_completion(client, SKEL_API, FALL)
        assert stats["backend"] == "skeleton"
        assert stats["session"]["running"] is False
        snap = stats["snapshot"]
        assert snap["frames_in"] == 200
        assert snap["frames_in"] == snap["frames_processed"] + snap["frames_dropped"]
        assert snap["alerts_by_level"]["WARNING"] >= 1
        # still frozen a moment later
        time.sleep(0.1)
        assert client.get(f"{SKEL_API}/stats").json()["snapshot"] == snap

    def test_manual_stop_keeps_partial_counters(self, client):
        client.post(f"{SKEL_API}/stream/start", json={"source": STATIC_LONG})
        time.sleep(0.5)
        client.post(f"{SKEL_API}/stream/stop")
        snap = client.get(f"{SKEL_API}/stats").json()["snapshot"]
        assert 0 < snap["frames_processed"] < 3000
        assert snap["frames_in"] == snap["frames_processed"] + snap["frames_dropped"]


class TestAlertsEndpoint:
    def _seed_alerts(self, client, tmp_path, n=5):
        store = client.app.state.store
        clip = tmp_path / "c.ewclip"
        thumb = tmp_path / "t.png"
        clip.write_bytes(b"clip")
        thumb.write_bytes(b"png")
        records = []
        for i in range(n):
            level = "DANGER" if i % 2 == 0 else "WARNING"
            records.append(store.add_alert(
                "seed", Backend.SKELETON, 1000.0 + i, level, f"alert-{i}",
                str(clip), str(thumb),
            ))
        return records

    def test_pagination_matches_oracle(self, client, tmp_path):
        self._seed_alerts(client, tmp_path, n=5)
        # oracle: newest first by created_at -> summaries alert-4 .. alert-0
        page = client.get(f"{SKEL_API}/alerts", params={"limit": 2, "offset": 2}).json()
        assert page["total"] == 5
        assert page["limit"] == 2 and page["offset"] == 2
        assert [a["summary"] for a in page["alerts"]] == ["alert-2", "alert-1"]
        rest = client.get(f"{SKEL_API}/alerts", params={"limit": 10, "offset": 4}).json()
        assert [a["summary"] for a in rest["alerts"]] == ["alert-0"]

    def test_level_filter(self, client, tmp_path):
        self._seed_alerts(client, tmp_path, n=5)
        warnings = client.get(f"{SKEL_API}/alerts", params={"level": "WARNING"}).json()
        assert warnings["total"] == 2
        assert {a["level"] for a in warnings["alerts"]} == {"WARNING"}

    def test_empty_feed(self, client):
        feed = client.get(f"{VLM_API}/alerts").json()
        assert feed == {"alerts": [], "total": 0, "limit": 50, "offset": 0}

    def test_session_alerts_retrievable_with_artifacts(self, client):
        run_to_completion(client, SKEL_API, PUNCH)
        feed = client.get(f"{SKEL_API}/alerts").json()
        assert feed["total"] >= 1
        alert = feed["alerts"][0]
        assert alert["level"] == "DANGER"

        clip = client.get(f"{SKEL_API}/alerts/{alert['alert_id']}/clip")
        assert clip.status_code == 200
        assert clip.content[:8] == b"EWCLIP01"
        thumb = client.get(f"{SKEL_API}/alerts/{alert['alert_id']}/thumbnail")
        assert thumb.status_code == 200
        assert thumb.content[:4] == b"\x89PNG"

    def test_clip_404s(self, client, tmp_path):
        records = self._seed_alerts(client, tmp_path, n=1)
        missing = client.get(f"{SKEL_API}/alerts/999999/clip")
        assert missing.status_code == 404
        assert missing.json()["error"] == "NOT_FOUND"
        # same id through the other backend's prefix must not resolve
        cross = client.get(f"{VLM_API}/alerts/{records[0].alert_id}/clip")
        assert cross.status_code == 404


class TestRouteIsolation:
    def test_skeleton_activity_invisible_to_vlm_prefix(self, client):
        run_to_completion(client, SKEL_API, PUNCH)
        assert client.get(f"{SKEL_API}/alerts").json()["total"] >= 1
        assert client.get(f"{VLM_API}/alerts").json()["total"] == 0
        vlm_stats = client.get(f"{VLM_API}/stats").json()
        assert vlm_stats["session"] is None
        assert vlm_stats["snapshot"]["frames_in"] == 0


class TestUpload:
    def _upload(self, client, name: str, data: bytes):
        return client.post(
            f"{SKEL_API}/upload", files={"file": (name, data, "application/octet-stream")}
        )

    def test_round_trip_then_start(self, client):
        records = generate("two_person_punch", seed=3, frames=130)
        payload = "\n".join(json.dumps(r) for r in records).encode()
        resp = self._upload(client, "cam1 recording.jsonl", payload)
        assert resp.status_code == 200
        body = resp.json()
        assert body["frames"] == 130
        assert body["filename"] == "cam1_recording.jsonl"

        stats = run_to_completion(client, SKEL_API, body["descriptor"])
        assert stats["snapshot"]["frames_in"] == 130
        assert stats["session"]["source"] == body["descriptor"]

    def test_unsupported_format(self, client):
        resp = self._upload(client, "video.mp4", b"\x00\x00\x00\x18ftyp")
        assert resp.status_code == 415
        assert resp.json()["error"] == "UNSUPPORTED_FORMAT"

    def test_malformed_replay(self, client):
        resp = self._upload(client, "bad.jsonl", b'{"frame": 0}\n')
        assert resp.status_code == 400
        body = resp.json()
        assert body["error"] == "MALFORMED_UPLOAD"
        assert "line 1" in body["detail"]
        # nothing kept on disk for rejected uploads
        recordings = client.app.state.layout.recordings
        assert list(recordings.glob("*bad.jsonl")) == []


class TestWebSocket:
    def test_fanout_to_all_subscribers(self, client):
        with contextlib.ExitStack() as stack:
            sockets = [
                stack.enter_context(client.websocket_connect(f"{SKEL_WS}/live"))
                for _ in range(3)
            ]
            resp = client.post(f"{SKEL_API}/stream/start", json={"source": PUNCH})
            assert resp.status_code == 200

            def drain(ws):
                events, frames = [], 0
                while True:
                    msg = ws.receive()
                    if msg.get("text") is not None:
                        event = json.loads(msg["text"])
                        events.append(event)
                        if event.get("type") == "session" and event.get("state") == "stopped":
                            return events, frames
                    elif msg.get("bytes") is not None:
                        frames += 1

            results = [drain(ws) for ws in sockets]

        total_alerts = client.get(f"{SKEL_API}/alerts").json()["total"]
        assert total_alerts >= 1
        for events, frames in results:
            states = [e.get("state") for e in events if e.get("type") == "session"]
            assert states == ["started", "stopped"]
            # every alert event reaches every subscriber exactly once
            alert_events = [e for e in events if e.get("type") == "alert"]
            assert len(alert_events) == total_alerts
            assert alert_events[0]["alert"]["level"] == "DANGER"
            stats_events = [e for e in events if e.get("type") == "stats"]
            assert stats_events
            assert frames > 0  # lossy stream still delivers

    def test_event_stream_carries_status_payloads(self, client):
        with client.websocket_connect(f"{SKEL_WS}/live") as ws:
            client.post(f"{SKEL_API}/stream/start", json={"source": FALL})
            saw_status = False
            while True:
                msg = ws.receive()
                if msg.get("text") is None:
                    continue
                event = json.loads(msg["text"])
                if event.get("type") == "status":
                    saw_status = True
                if event.get("type") == "session" and event.get("state") == "stopped":
                    break
            assert saw_status


class TestRestartDurability:
    def test_alerts_survive_process_restart(self, service_env):
        cfg = load_config(env=service_env)
        with TestClient(create_app(cfg)) as client:
            run_to_completion(client, SKEL_API, PUNCH)
            before = client.get(f"{SKEL_API}/alerts").json()
            assert before["total"] >= 1

        with TestClient(create_app(load_config(env=service_env))) as client:
            after = client.get(f"{SKEL_API}/alerts").json()
            assert after["alerts"] == before["alerts"]
            alert_id = after["alerts"][0]["alert_id"]
            clip = client.get(f"{SKEL_API}/alerts/{alert_id}/clip")
            assert clip.status_code == 200
            # stats are per-process; a restart starts from zero
            assert client.get(f"{SKEL_API}/stats").json()["snapshot"]["frames_in"] == 0


class TestVlmBackend:
    def test_vlm_session_over_mock_endpoint(self, service_env, tmp_path):
        script = [
            json.dumps({"level": "SAFE", "summary": "calm"}),
            json.dumps({"level": "DANGER", "summary": "fight"}),
            json.dumps({"level": "SAFE", "summary": "calm"}),
        ]
        mock = make_mock_vlm_app(script)

        from edgewatch.testing import SyncASGITransport
        transport = SyncASGITransport(mock)
        app = create_app(
            load_config(env=service_env), vlm_transport_for=lambda ep: transport
        )
        with TestClient(app) as client:
            resp = client.post(
                f"{VLM_API}/stream/start",
                json={"source": "scenario:single_static?seed=7&frames=430"},
            )
            assert resp.status_code == 200
            assert resp.json()["backend"] == "vlm"
            stats = wait_stopped(client, VLM_API)
            assert stats["snapshot"]["frames_in"] == 430

            feed = client.get(f"{VLM_API}/alerts").json()
            assert feed["total"] == 1
            alert = feed["alerts"][0]
            assert alert["level"] == "DANGER"
            assert alert["extra"]["chunk_index"] == 1
            assert alert["extra"]["parse_mode"] == "structured"
            clip = client.get(f"{VLM_API}/alerts/{alert['alert_id']}/clip")
            assert clip.status_code == 200
            assert clip.content[:8] == b"EWCLIP01"
            # skeleton side untouched
            assert client.get(f"{SKEL_API}/alerts").json()["total"] == 0


def _alt_values(parse, default):
    """Two distinct non-default values (env string form, file JSON form)."""
    if parse is _parse_bool:
        flipped = not default
        return ("1" if flipped else "0", flipped), ("1" if flipped else "0", flipped)
    if parse is int:
        return (str(default + 3), default + 3), (str(default + 7), default + 7)
    if parse is float:
        return (str(default + 0.25), default + 0.25), (str(default + 0.75), default + 0.75)
    if parse is _parse_int_list:
        return ("1,2,9", (1, 2, 9)), ("4,5", (4, 5))
    if parse is _parse_str_list:
        return (
            ("http://e:1", ("http://e:1",)),
            ("http://f:1,http://f:2", ("http://f:1", "http://f:2")),
        )
    return (f"{default}-env", f"{default}-env"), (f"{default}-file", f"{default}-file")


@pytest.mark.parametrize("section,knobs", [
    ("skel", SKEL_KNOBS), ("vlm", VLM_KNOBS), ("service", SERVICE_KNOBS),
])
class TestConfigPrecedence:
    def test_env_overrides_default(self, section, knobs):
        for name, (env_var, parse, default) in knobs.items():
            (env_str, env_val), _ = _alt_values(parse, default)
            cfg = load_config(env={env_var: env_str})
            assert getattr(cfg, section)[name] == env_val, name

    def test_file_overrides_default(self, section, knobs, tmp_path):
        for name, (env_var, parse, default) in knobs.items():
            _, (file_str, file_val) = _alt_values(parse, default)
            raw = file_val if not isinstance(file_val, tuple) else list(file_val)
            path = tmp_path / f"{section}-{name}.json"
            path.write_text(json.dumps({section: {name: raw}}))
            cfg = load_config(file_path=str(path), env={})
            assert getattr(cfg, section)[name] == file_val, name

    def test_env_beats_file(self, section, knobs, tmp_path):
        for name, (env_var, parse, default) in knobs.items():
            (env_str, env_val), (_, file_val) = _alt_values(parse, default)
            raw = file_val if not isinstance(file_val, tuple) else list(file_val)
            path = tmp_path / f"{section}-{name}.json"
            path.write_text(json.dumps({section: {name: raw}}))
            cfg = load_config(file_path=str(path), env={env_var: env_str})
            assert getattr(cfg, section)[name] == env_val, name

    def test_unset_knobs_keep_defaults(self, section, knobs):
        cfg = load_config(env={})
        for name, (_env, _parse, default) in knobs.items():
            assert getattr(cfg, section)[name] == default, name


class TestConfigMaterialization:
    def test_config_file_named_by_env_var(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"skel": {"clip_stride": 15}}))
        cfg = load_config(env={"EDGEWATCH_CONFIG": str(path)})
        assert cfg.skel["clip_stride"] == 15

    def test_pipeline_config_from_knobs(self):
        cfg = load_config(env={
            "SKEL_CLIP_LEN": "64",
            "SKEL_DANGER_CLASSES": "1,2",
            "SKEL_CLASSIFIER": "external",
            "SKEL_CLASSIFIER_ENDPOINT": "http://gcn:9000",
        })
        pipe = build_pipeline_config(cfg.skel, alert_dir="/tmp/x")
        assert pipe.assembly.clip_len == 64
        assert pipe.risk.danger_classes == frozenset({1, 2})
        assert pipe.classifier.endpoint == "http://gcn:9000"
        assert pipe.tracker.lost_retention_frames == 60
        assert pipe.alert_dir == "/tmp/x"

    def test_vlm_config_from_knobs(self):
        cfg = load_config(env={
            "VLM_DUAL_SERVER_MODE": "true",
            "VLM_ENDPOINTS": "http://a:1,http://b:2",
            "VLM_SCENE_PROFILE": "indoor",
        })
        vcfg = build_vlm_config(cfg.vlm)
        assert vcfg.dual_server_mode is True
        assert vcfg.endpoints == ("http://a:1", "http://b:2")
        assert vcfg.scene_profile.value == "indoor"
        assert vcfg.max_tokens == 10024


class TestStaticFrontend:
    def test_dist_dir_served_when_configured(self, service_env, tmp_path):
        dist = tmp_path / "dist"
        dist.mkdir()
        (dist / "index.html").write_text("<html><body>panel</body></html>")
        env = dict(service_env, EDGEWATCH_FRONTEND_DIST=str(dist))
        with TestClient(create_app(load_config(env=env))) as client:
            resp = client.get("/")
            assert resp.status_code == 200
            assert "panel" in resp.text
            # API routes take precedence over the static mount
            assert client.get(f"{SKEL_API}/stats").status_code == 200

    def test_no_dist_no_root_route(self, client):
        assert client.get("/").status_code == 404
