"""Per-backend session lifecycle.

One BackendSession per backend enforces the at-most-one-running
invariant with a lifecycle lock; the pipeline itself runs on a daemon
thread and auto-finalizes when a replay source is exhausted.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from dataclasses import replace

from ..runtime.metrics import zero_snapshot
from ..runtime.pipeline import PipelineSinks
from ..runtime.sources import FrameSource, SourceError, open_source
from .broadcast import Hub
from .store import AlertStore, Backend, SessionRecord

log = logging.getLogger("edgewatch.service")


class ServiceError(Exception):
    code = "INTERNAL"
    status = 500


class AlreadyRunningError(ServiceError):
    code = "ALREADY_RUNNING"
    status = 409


class NotRunningError(ServiceError):
    code = "NOT_RUNNING"
    status = 409


class BadSourceError(ServiceError):
    code = "BAD_SOURCE"
    status = 400


class UnsupportedFormatError(ServiceError):
    code = "UNSUPPORTED_FORMAT"
    status = 415


class MalformedUploadError(ServiceError):
    code = "MALFORMED_UPLOAD"
    status = 400


class ServiceSinks(PipelineSinks):
    """Bridges a running pipeline to the hub and the alert store.

    Alert ordering contract: the loops call on_alert only after the clip
    and thumbnail are on disk, and we insert into the store before the
    event goes out, so a record is never announced or listed early.
    """

    def __init__(self, session_id: str, backend: Backend, store: AlertStore, hub: Hub):
        self.session_id = session_id
        self._backend = backend
        self._store = store
        self._hub = hub
        self.last_stats: dict | None = None

    def on_frame(self, png: bytes) -> None:
        self._hub.publish_frame(png)

    def on_event(self, event: dict) -> None:
        if event.get("type") == "stats":
            self.last_stats = event.get("snapshot")
        self._hub.publish_event(event)

    def on_alert(self, alert: dict) -> None:
        record = self._store.add_alert(
            session_id=self.session_id,
            backend=self._backend,
            created_at=time.time(),
            level=alert["level"],
            summary=alert["summary"],
            clip_path=alert["clip_path"],
            thumbnail_path=alert["thumbnail_path"],
            extra=dict(alert.get("extra", {})),
        )
        self._hub.publish_event({"type": "alert", "alert": record.as_dict()})


class BackendSession:
    """Lifecycle wrapper: start/stop/stats for one backend.

    runner(source, sinks, stop_event) blocks until the session ends and
    returns a report object exposing .snapshot.
    """

    def __init__(self, backend: Backend, store: AlertStore, hub: Hub, runner):
        self.backend = backend
        self._store = store
        self._hub = hub
        self._runner = runner
        self._lock = threading.Lock()
        self._thread: threading.Thread | None = None
        self._stop_event: threading.Event | None = None
        self._record: SessionRecord | None = None
        self._sinks: ServiceSinks | None = None
        self._last_snapshot: dict = zero_snapshot().as_dict()
        self.last_report = None

    def start(self, source_descriptor: str) -> SessionRecord:
        if not source_descriptor or not str(source_descriptor).strip():
            raise BadSourceError("source descriptor is empty")
        with self._lock:
            if self._thread is not None and self._thread.is_alive():
                raise AlreadyRunningError(f"{self.backend.value} session already running")
            try:
                source = open_source(str(source_descriptor))
            except SourceError as exc:
                raise BadSourceError(str(exc)) from exc
            record = SessionRecord(
                session_id=f"{self.backend.value}-{uuid.uuid4().hex[:12]}",
                backend=self.backend,
                source=str(source_descriptor),
                started_at=time.time(),
            )
            self._store.add_session(record)
            sinks = ServiceSinks(record.session_id, self.backend, self._store, self._hub)
            stop_event = threading.Event()
            thread = threading.Thread(
                target=self._run,
                args=(source, sinks, stop_event, record),
                name=f"edgewatch-{self.backend.value}",
                daemon=True,
            )
            self._record = record
            self._sinks = sinks
            self._stop_event = stop_event
            self._thread = thread
            thread.start()
        self._hub.publish_event({
            "type": "session",
            "state": "started",
            "session": record.as_dict(),
        })
        return record

    def _run(self, source: FrameSource, sinks: ServiceSinks, stop_event, record):
        try:
            report = self._runner(source, sinks, stop_event)
            self.last_report = report
            self._last_snapshot = report.snapshot.as_dict()
        except Exception:
            log.exception("%s session %s crashed", self.backend.value, record.session_id)
            if sinks.last_stats is not None:
                self._last_snapshot = sinks.last_stats
        finally:
            stopped_at = max(time.time(), record.started_at)
            self._store.finish_session(record.session_id, stopped_at)
            with self._lock:
                self._record = replace(record, stopped_at=stopped_at)
            self._hub.publish_event({
                "type": "session",
                "state": "stopped",
                "session": self._record.as_dict(),
            })

    def stop(self) -> SessionRecord:
        with self._lock:
            thread = self._thread
            stop_event = self._stop_event
            if thread is None or not thread.is_alive():
                raise NotRunningError(f"no running {self.backend.value} session")
        stop_event.set()
        thread.join(timeout=60.0)
        if thread.is_alive():
            raise ServiceError("session did not stop in time")
        with self._lock:
            return self._record

    def shutdown(self) -> None:
        """Best-effort stop used at service teardown; never raises."""
        try:
            self.stop()
        except ServiceError:
            pass

    @property
    def running(self) -> bool:
        with self._lock:
            return self._thread is not None and self._thread.is_alive()

    def stats(self) -> dict:
        with self._lock:
            record = self._record
            running = self._thread is not None and self._thread.is_alive()
            sinks = self._sinks
        snapshot = self._last_snapshot
        if running and sinks is not None and sinks.last_stats is not None:
            snapshot = sinks.last_stats
        return {
            "backend": self.backend.value,
            "running": running,
            "session": record.as_dict() if record else None,
            "snapshot": snapshot,
        }
