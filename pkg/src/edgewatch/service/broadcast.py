"""Live fan-out from worker threads to WebSocket subscribers.

Two channels per subscriber with different loss semantics: event
messages (alerts, stats ticks, status) ride an unbounded queue and are
never dropped; overlay frames ride a depth-1 queue where a stale frame
is evicted by the next one, so a slow subscriber only loses frames and
only its own.
"""

from __future__ import annotations

import asyncio
import json
import threading


class Subscription:
    def __init__(self):
        self.events: asyncio.Queue[str] = asyncio.Queue()
        self.frames: asyncio.Queue[bytes] = asyncio.Queue(maxsize=1)


def _offer_frame(sub: Subscription, data: bytes) -> None:
    if sub.frames.full():
        try:
            sub.frames.get_nowait()
        except asyncio.QueueEmpty:
            pass
    sub.frames.put_nowait(data)


class Hub:
    """Publishers are pipeline threads; subscribers live on the asyncio
    loop. Publishing before the loop is bound (headless runs) is a no-op."""

    def __init__(self):
        self._subs: set[Subscription] = set()
        self._lock = threading.Lock()
        self._loop: asyncio.AbstractEventLoop | None = None

    def bind_loop(self, loop: asyncio.AbstractEventLoop) -> None:
        self._loop = loop

    def subscribe(self) -> Subscription:
        sub = Subscription()
        with self._lock:
            self._subs.add(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            self._subs.discard(sub)

    @property
    def subscriber_count(self) -> int:
        with self._lock:
            return len(self._subs)

    def publish_event(self, payload: dict) -> None:
        loop = self._loop
        if loop is None or loop.is_closed():
            return
        text = json.dumps(payload)
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            try:
                loop.call_soon_threadsafe(sub.events.put_nowait, text)
            except RuntimeError:
                return  # loop shut down mid-publish

    def publish_frame(self, data: bytes) -> None:
        loop = self._loop
        if loop is None or loop.is_closed():
            return
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            try:
                loop.call_soon_threadsafe(_offer_frame, sub, data)
            except RuntimeError:
                return
