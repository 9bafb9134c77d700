"""Session and alert persistence.

The store is an interface so deployments can swap the backend; the
reference implementation embeds sqlite (single file under the storage
root), which gives us restart durability and concurrent reads with
serialized writes for free.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Backend(str, Enum):
    SKELETON = "skeleton"
    VLM = "vlm"


@dataclass(frozen=True)
class StorageLayout:
    """Directory hierarchy under one root; created eagerly on startup."""

    root: Path

    @property
    def recordings(self) -> Path:
        return self.root / "recordings"

    @property
    def alerts(self) -> Path:
        return self.root / "alerts"

    @property
    def overlays(self) -> Path:
        return self.root / "overlays"

    @property
    def db_path(self) -> Path:
        return self.root / "edgewatch.sqlite3"

    def ensure(self) -> "StorageLayout":
        for d in (self.root, self.recordings, self.alerts, self.overlays):
            d.mkdir(parents=True, exist_ok=True)
        return self


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    backend: Backend
    source: str
    started_at: float
    stopped_at: float | None = None

    def __post_init__(self):
        if self.stopped_at is not None and self.stopped_at < self.started_at:
            raise ValueError("stopped_at precedes started_at")

    @property
    def running(self) -> bool:
        return self.stopped_at is None

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "backend": self.backend.value,
            "source": self.source,
            "started_at": self.started_at,
            "stopped_at": self.stopped_at,
            "running": self.running,
        }


@dataclass(frozen=True)
class AlertRecord:
    alert_id: int
    session_id: str
    backend: Backend
    created_at: float
    level: str
    summary: str
    clip_path: str
    thumbnail_path: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.level not in ("DANGER", "WARNING"):
            raise ValueError(f"alert level must be DANGER or WARNING, got {self.level!r}")

    def as_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "session_id": self.session_id,
            "backend": self.backend.value,
            "created_at": self.created_at,
            "level": self.level,
            "summary": self.summary,
            "clip_path": self.clip_path,
            "thumbnail_path": self.thumbnail_path,
            "extra": self.extra,
        }


class AlertStore:
    """Persistence interface; implementations must serialize writes."""

    def add_session(self, record: SessionRecord) -> None:
        raise NotImplementedError

    def finish_session(self, session_id: str, stopped_at: float) -> None:
        raise NotImplementedError

    def get_session(self, session_id: str) -> SessionRecord | None:
        raise NotImplementedError

    def add_alert(
        self,
        session_id: str,
        backend: Backend,
        created_at: float,
        level: str,
        summary: str,
        clip_path: str,
        thumbnail_path: str,
        extra: dict | None = None,
    ) -> AlertRecord:
        raise NotImplementedError

    def get_alert(self, alert_id: int) -> AlertRecord | None:
        raise NotImplementedError

    def list_alerts(
        self,
        backend: Backend,
        limit: int = 50,
        offset: int = 0,
        level: str | None = None,
    ) -> list[AlertRecord]:
        raise NotImplementedError

    def count_alerts(self, backend: Backend, level: str | None = None) -> int:
        raise NotImplementedError

    def close(self) -> None:
        pass


_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    backend    TEXT NOT NULL,
    source     TEXT NOT NULL,
    started_at REAL NOT NULL,
    stopped_at REAL
);
CREATE TABLE IF NOT EXISTS alerts (
    alert_id       INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id     TEXT NOT NULL,
    backend        TEXT NOT NULL,
    created_at     REAL NOT NULL,
    level          TEXT NOT NULL CHECK (level IN ('DANGER', 'WARNING')),
    summary        TEXT NOT NULL,
    clip_path      TEXT NOT NULL,
    thumbnail_path TEXT NOT NULL,
    extra          TEXT NOT NULL DEFAULT '{}'
);
CREATE INDEX IF NOT EXISTS idx_alerts_feed
    ON alerts (backend, created_at DESC, alert_id DESC);
"""


class SqliteStore(AlertStore):
    def __init__(self, db_path: str | Path):
        # one connection shared across the API and session threads
        self._conn = sqlite3.connect(str(db_path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.RLock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def add_session(self, record: SessionRecord) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions (session_id, backend, source, started_at, stopped_at)"
                " VALUES (?, ?, ?, ?, ?)",
                (record.session_id, record.backend.value, record.source,
                 record.started_at, record.stopped_at),
            )

    def finish_session(self, session_id: str, stopped_at: float) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE sessions SET stopped_at = ? WHERE session_id = ?",
                (stopped_at, session_id),
            )

    def get_session(self, session_id: str) -> SessionRecord | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()
        return self._session_from_row(row) if row else None

    def add_alert(
        self,
        session_id: str,
        backend: Backend,
        created_at: float,
        level: str,
        summary: str,
        clip_path: str,
        thumbnail_path: str,
        extra: dict | None = None,
    ) -> AlertRecord:
        if level not in ("DANGER", "WARNING"):
            raise ValueError(f"refusing to persist level {level!r}")
        for path in (clip_path, thumbnail_path):
            if not Path(path).is_file():
                raise FileNotFoundError(f"alert artifact missing: {path}")
        extra = extra or {}
        with self._lock, self._conn:
            cur = self._conn.execute(
                "INSERT INTO alerts (session_id, backend, created_at, level, summary,"
                " clip_path, thumbnail_path, extra) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (session_id, backend.value, created_at, level, summary,
                 clip_path, thumbnail_path, json.dumps(extra)),
            )
            alert_id = cur.lastrowid
        return AlertRecord(
            alert_id=alert_id,
            session_id=session_id,
            backend=backend,
            created_at=created_at,
            level=level,
            summary=summary,
            clip_path=clip_path,
            thumbnail_path=thumbnail_path,
            extra=extra,
        )

    def get_alert(self, alert_id: int) -> AlertRecord | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM alerts WHERE alert_id = ?", (alert_id,)
            ).fetchone()
        return self._alert_from_row(row) if row else None

    def list_alerts(
        self,
        backend: Backend,
        limit: int = 50,
        offset: int = 0,
        level: str | None = None,
    ) -> list[AlertRecord]:
        query = "SELECT * FROM alerts WHERE backend = ?"
        params: list = [backend.value]
        if level is not None:
            query += " AND level = ?"
            params.append(level)
        query += " ORDER BY created_at DESC, alert_id DESC LIMIT ? OFFSET ?"
        params += [limit, offset]
        with self._lock:
            rows = self._conn.execute(query, params).fetchall()
        return [self._alert_from_row(r) for r in rows]

    def count_alerts(self, backend: Backend, level: str | None = None) -> int:
        query = "SELECT COUNT(*) FROM alerts WHERE backend = ?"
        params: list = [backend.value]
        if level is not None:
            query += " AND level = ?"
            params.append(level)
        with self._lock:
            return int(self._conn.execute(query, params).fetchone()[0])

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    @staticmethod
    def _session_from_row(row: sqlite3.Row) -> SessionRecord:
        return SessionRecord(
            session_id=row["session_id"],
            backend=Backend(row["backend"]),
            source=row["source"],
            started_at=row["started_at"],
            stopped_at=row["stopped_at"],
        )

    @staticmethod
    def _alert_from_row(row: sqlite3.Row) -> AlertRecord:
        return AlertRecord(
            alert_id=row["alert_id"],
            session_id=row["session_id"],
            backend=Backend(row["backend"]),
            created_at=row["created_at"],
            level=row["level"],
            summary=row["summary"],
            clip_path=row["clip_path"],
            thumbnail_path=row["thumbnail_path"],
            extra=json.loads(row["extra"]),
        )
