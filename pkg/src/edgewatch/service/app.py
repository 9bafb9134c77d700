"""HTTP/WebSocket facade.

One process hosts both backends behind separate route prefixes with
identical endpoint shapes: the skeleton pipeline under /skel-api +
/skel-ws and the semantic layer under /api + /ws. A deployment that
wants two processes can run two instances with one backend each; the
interface contract is identical either way.
"""

from __future__ import annotations

import asyncio
import re
import uuid
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import APIRouter, Body, FastAPI, File, UploadFile, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..runtime.pipeline import run_pipeline
from ..runtime.sources import MalformedReplayError, load_replay
from ..vlm.loop import run_vlm_session
from .broadcast import Hub
from .config import AppConfig, build_pipeline_config, build_vlm_config, load_config
from .sessions import (
    BackendSession,
    MalformedUploadError,
    ServiceError,
    UnsupportedFormatError,
)
from .store import AlertStore, Backend, SqliteStore, StorageLayout

PREFIXES = {
    Backend.SKELETON: ("/skel-api", "/skel-ws"),
    Backend.VLM: ("/api", "/ws"),
}


def _store_upload(layout: StorageLayout, filename: str, data: bytes) -> dict:
    suffix = Path(filename).suffix.lower()
    if suffix not in (".jsonl", ".ndjson"):
        raise UnsupportedFormatError(
            f"unsupported media format {suffix or '(none)'}; upload a pose-replay .jsonl"
        )
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", Path(filename).name) or "upload.jsonl"
    dest = layout.recordings / f"{uuid.uuid4().hex[:8]}-{safe}"
    dest.write_bytes(data)
    try:
        frames = load_replay(dest)
    except MalformedReplayError as exc:
        dest.unlink(missing_ok=True)
        raise MalformedUploadError(str(exc)) from exc
    return {"descriptor": str(dest), "frames": len(frames), "filename": safe}


def _api_router(prefix: str, backend: Backend, session: BackendSession,
                store: AlertStore, layout: StorageLayout) -> APIRouter:
    router = APIRouter(prefix=prefix)

    @router.post("/stream/start")
    async def stream_start(body: dict = Body(...)):
        record = await run_in_threadpool(session.start, body.get("source", ""))
        return record.as_dict()

    @router.post("/stream/stop")
    async def stream_stop():
        record = await run_in_threadpool(session.stop)
        return record.as_dict()

    @router.get("/alerts")
    async def alerts(limit: int = 50, offset: int = 0, level: str | None = None):
        records = await run_in_threadpool(
            store.list_alerts, backend, limit, offset, level
        )
        total = await run_in_threadpool(store.count_alerts, backend, level)
        return {
            "alerts": [r.as_dict() for r in records],
            "total": total,
            "limit": limit,
            "offset": offset,
        }

    @router.get("/stats")
    async def stats():
        return session.stats()

    @router.post("/upload")
    async def upload(file: UploadFile = File(...)):
        data = await file.read()
        return await run_in_threadpool(
            _store_upload, layout, file.filename or "upload", data
        )

    @router.get("/alerts/{alert_id}/clip")
    async def alert_clip(alert_id: int):
        record = await run_in_threadpool(store.get_alert, alert_id)
        if record is None or record.backend != backend or not Path(record.clip_path).is_file():
            return JSONResponse(status_code=404, content={"error": "NOT_FOUND"})
        return FileResponse(
            record.clip_path,
            media_type="application/octet-stream",
            filename=Path(record.clip_path).name,
        )

    @router.get("/alerts/{alert_id}/thumbnail")
    async def alert_thumbnail(alert_id: int):
        record = await run_in_threadpool(store.get_alert, alert_id)
        if record is None or record.backend != backend or not Path(record.thumbnail_path).is_file():
            return JSONResponse(status_code=404, content={"error": "NOT_FOUND"})
        return FileResponse(record.thumbnail_path, media_type="image/png")

    return router


def _ws_handler(hub: Hub):
    async def live(websocket: WebSocket):
        await websocket.accept()
        sub = hub.subscribe()
        ev_task = asyncio.create_task(sub.events.get())
        fr_task = asyncio.create_task(sub.frames.get())
        rx_task = asyncio.create_task(websocket.receive())
        try:
            while True:
                done, _ = await asyncio.wait(
                    {ev_task, fr_task, rx_task},
                    return_when=asyncio.FIRST_COMPLETED,
                )
                if rx_task in done:
                    msg = rx_task.result()
                    if msg.get("type") == "websocket.disconnect":
                        break
                    rx_task = asyncio.create_task(websocket.receive())
                if ev_task in done:
                    await websocket.send_text(ev_task.result())
                    ev_task = asyncio.create_task(sub.events.get())
                if fr_task in done:
                    await websocket.send_bytes(fr_task.result())
                    fr_task = asyncio.create_task(sub.frames.get())
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            hub.unsubscribe(sub)
            for task in (ev_task, fr_task, rx_task):
                task.cancel()

    return live


def create_app(
    config: AppConfig | None = None,
    store: AlertStore | None = None,
    vlm_transport_for=None,
) -> FastAPI:
    """Assemble the dual-backend service.

    vlm_transport_for lets tests route chunk inference through an
    in-process ASGI transport instead of a live endpoint.
    """
    cfg = config or load_config()
    layout = StorageLayout(Path(cfg.service["storage_root"])).ensure()
    owns_store = store is None
    store = store or SqliteStore(layout.db_path)
    hubs = {b: Hub() for b in Backend}

    def skel_runner(source, sinks, stop_event):
        pipe_cfg = build_pipeline_config(
            cfg.skel, alert_dir=str(layout.alerts / sinks.session_id)
        )
        return run_pipeline(source, pipe_cfg, sinks, stop_event)

    def vlm_runner(source, sinks, stop_event):
        vlm_cfg = build_vlm_config(cfg.vlm)
        return run_vlm_session(
            source, vlm_cfg, sinks, stop_event,
            paced=cfg.vlm["paced"],
            alert_dir=str(layout.alerts / sinks.session_id),
            transport_for=vlm_transport_for,
        )

    sessions = {
        Backend.SKELETON: BackendSession(Backend.SKELETON, store, hubs[Backend.SKELETON], skel_runner),
        Backend.VLM: BackendSession(Backend.VLM, store, hubs[Backend.VLM], vlm_runner),
    }

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        loop = asyncio.get_running_loop()
        for hub in hubs.values():
            hub.bind_loop(loop)
        yield
        for session in sessions.values():
            await run_in_threadpool(session.shutdown)
        if owns_store:
            store.close()

    app = FastAPI(title="edgewatch", lifespan=lifespan)
    app.state.config = cfg
    app.state.layout = layout
    app.state.store = store
    app.state.sessions = sessions
    app.state.hubs = hubs

    @app.exception_handler(ServiceError)
    async def service_error(_request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.code, "detail": str(exc)},
        )

    for backend, (api_prefix, ws_prefix) in PREFIXES.items():
        app.include_router(
            _api_router(api_prefix, backend, sessions[backend], store, layout)
        )
        app.websocket(f"{ws_prefix}/live")(_ws_handler(hubs[backend]))

    dist = cfg.service.get("frontend_dist", "")
    if dist and Path(dist).is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="frontend")

    return app
