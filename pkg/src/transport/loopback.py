"""
In-process transport: two endpoints joined by a pair of unbounded queues.
"""

from __future__ import annotations

import queue
from typing import Optional

from src.transport.endpoint import Endpoint
from src.utils.config import settings
from src.utils.errors import TransportClosed

_CLOSED = None


class LoopbackEndpoint(Endpoint):
    def __init__(
        self,
        inbox: "queue.Queue[Optional[bytes]]",
        outbox: "queue.Queue[Optional[bytes]]",
        timeout: float | None = None,
    ) -> None:
        super().__init__()
        self._inbox = inbox
        self._outbox = outbox
        self._timeout = settings.transport_timeout if timeout is None else timeout
        self._closed = False

    def send_frame(self, frame: bytes) -> None:
        if self._closed:
            raise TransportClosed("endpoint is closed")
        self._outbox.put(bytes(frame))

    def recv_frame(self) -> bytes:
        if self._closed:
            raise TransportClosed("endpoint is closed")
        try:
            frame = self._inbox.get(timeout=self._timeout)
        except queue.Empty as exc:
            raise TransportClosed(f"no message within {self._timeout}s") from exc
        if frame is _CLOSED:
            self._closed = True
            raise TransportClosed("peer closed the channel")
        return frame

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._outbox.put(_CLOSED)


class LoopbackTransport:
    """Creates the Alice/Bob endpoint pair."""

    def __init__(self, timeout: float | None = None) -> None:
        a_to_b: "queue.Queue[Optional[bytes]]" = queue.Queue()
        b_to_a: "queue.Queue[Optional[bytes]]" = queue.Queue()
        self.alice = LoopbackEndpoint(inbox=b_to_a, outbox=a_to_b, timeout=timeout)
        self.bob = LoopbackEndpoint(inbox=a_to_b, outbox=b_to_a, timeout=timeout)

    def close(self) -> None:
        self.alice.close()
        self.bob.close()
