"""In-process test doubles: run ASGI mock servers under sync httpx clients.

The inference clients are synchronous (they run on worker threads), so
tests inject this transport to call FastAPI mocks without opening
sockets.
"""

from __future__ import annotations

import asyncio

import httpx


class SyncASGITransport(httpx.BaseTransport):
    """Bridge a sync httpx.Client onto an ASGI app, one event loop per
    request (handlers must not hold loop-bound state across calls)."""

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def roundtrip() -> tuple[int, httpx.Headers, bytes]:
            response = await self._transport.handle_async_request(request)
            body = await response.aread()
            return response.status_code, response.headers, body

        status, headers, body = asyncio.run(roundtrip())
        # Rebuild with a sync byte stream; sync clients reject async streams.
        return httpx.Response(status, headers=headers, content=body)

    def close(self) -> None:
        pass
