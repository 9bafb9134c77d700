"""Scriptable mock of a chat-style vision inference server.

Honors POST /v1/chat/completions with the interleaved text+image message
shape and replies from a script: a list of response strings consumed in
order (the last entry repeats once exhausted), or a callable
(request_body, call_index) -> str.  Every request body is recorded for
assertions.  Run in-process via an ASGI transport or serve it with
uvicorn for socket-level tests.
"""

from __future__ import annotations

import json
import threading
import time

from fastapi import FastAPI, Request

DEFAULT_RESPONSE = json.dumps({"level": "SAFE", "summary": "nothing notable"})


def make_mock_vlm_app(script=None, delay_s: float = 0.0) -> FastAPI:
    app = FastAPI()
    app.state.requests = []
    app.state.lock = threading.Lock()
    app.state.script = script
    app.state.calls = 0

    @app.post("/v1/chat/completions")
    async def chat_completions(request: Request):
        body = await request.json()
        with app.state.lock:
            index = app.state.calls
            app.state.calls += 1
            app.state.requests.append(body)
        if delay_s > 0:
            time.sleep(delay_s)
        script = app.state.script
        if script is None:
            text = DEFAULT_RESPONSE
        elif callable(script):
            text = script(body, index)
        else:
            text = script[min(index, len(script) - 1)]
        return {
            "id": f"mock-{index}",
            "object": "chat.completion",
            "model": body.get("model", "mock"),
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": text},
                    "finish_reason": "stop",
                }
            ],
        }

    return app


class MockVlmServer:
    """Socket-backed mock for tests that need a real URL (uvicorn thread)."""

    def __init__(self, script=None, delay_s: float = 0.0):
        import uvicorn

        self.app = make_mock_vlm_app(script, delay_s)
        config = uvicorn.Config(
            self.app, host="127.0.0.1", port=0, log_level="warning", lifespan="off"
        )
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def __enter__(self) -> "MockVlmServer":
        self._thread.start()
        deadline = time.monotonic() + 10.0
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("mock VLM server failed to start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=5.0)

    @property
    def url(self) -> str:
        servers = self._server.servers
        sock = servers[0].sockets[0]
        host, port = sock.getsockname()[:2]
        return f"http://{host}:{port}"

    @property
    def requests(self) -> list[dict]:
        return self.app.state.requests
