"""
Endpoint contract shared by the loopback and socket transports.

Both carry encoded frames, so the protocol layer cannot tell them apart.
The base class enforces per-session round ordering on receive.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from typing import Dict

from src.transport.messages import ProtocolMessage, decode_message
from src.utils.errors import FrameCorrupt


class Endpoint(ABC):
    """One side of a reliable, in-order, framed channel."""

    def __init__(self) -> None:
        self._last_round: Dict[int, int] = {}
        self._lock = threading.Lock()

    # ── raw frame I/O ────────────────────────────────────────────────
    @abstractmethod
    def send_frame(self, frame: bytes) -> None:
        """Deliver one encoded frame to the peer."""

    @abstractmethod
    def recv_frame(self) -> bytes:
        """Block until the next frame arrives; raise ``TransportClosed`` on close."""

    @abstractmethod
    def close(self) -> None: ...

    # ── message I/O ──────────────────────────────────────────────────
    def send(self, msg: ProtocolMessage) -> None:
        self.send_frame(msg.encode())

    def recv(self) -> ProtocolMessage:
        msg = decode_message(self.recv_frame())
        with self._lock:
            last = self._last_round.get(msg.session_id, -1)
            if msg.round <= last:
                raise FrameCorrupt(
                    f"session {msg.session_id:#x}: round {msg.round} after {last}"
                )
            self._last_round[msg.session_id] = msg.round
        return msg

    def __enter__(self) -> "Endpoint":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
