"""
Framed TCP transport for two-process operation.

Bob listens, Alice connects. Frames are written with ``sendall`` and read
back with exact-length reads; a connection that ends mid-frame is a
``FrameCorrupt``, one that ends between frames is ``TransportClosed``.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from typing import Tuple

from src.transport.endpoint import Endpoint
from src.transport.messages import HEADER_SIZE, frame_length
from src.utils.config import settings
from src.utils.errors import FrameCorrupt, TransportClosed

logger = logging.getLogger(__name__)

_PREFIX = 4


class SocketEndpoint(Endpoint):
    """Endpoint over a connected stream socket."""

    def __init__(self, sock: socket.socket, timeout: float | None = None) -> None:
        super().__init__()
        self._sock = sock
        self._sock.settimeout(settings.transport_timeout if timeout is None else timeout)
        self._send_lock = threading.Lock()
        self._closed = False

    def send_frame(self, frame: bytes) -> None:
        if self._closed:
            raise TransportClosed("endpoint is closed")
        try:
            with self._send_lock:
                self._sock.sendall(frame)
        except OSError as exc:
            raise TransportClosed(f"send failed: {exc}") from exc

    def recv_frame(self) -> bytes:
        prefix = self._recv_exact(_PREFIX, at_boundary=True)
        body = self._recv_exact(frame_length(prefix), at_boundary=False)
        return prefix + body

    def _recv_exact(self, size: int, *, at_boundary: bool) -> bytes:
        data = bytearray()
        while len(data) < size:
            try:
                part = self._sock.recv(size - len(data))
            except socket.timeout as exc:
                raise TransportClosed("receive timed out") from exc
            except OSError as exc:
                raise TransportClosed(f"receive failed: {exc}") from exc
            if not part:
                if at_boundary and not data:
                    raise TransportClosed("peer closed the connection")
                raise FrameCorrupt(f"connection closed after {len(data)} of {size} bytes")
            data.extend(part)
        return bytes(data)

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def parse_endpoint(text: str) -> Tuple[str, int]:
    """``host:port`` or ``:port`` (all interfaces) → ``(host, port)``."""
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must look like host:port, got {text!r}")
    return host or "0.0.0.0", int(port)


def listen(host: str, port: int, timeout: float | None = None) -> SocketEndpoint:
    """Accept exactly one peer on ``host:port``."""
    with socket.create_server((host, port), reuse_port=False) as server:
        server.settimeout(settings.transport_timeout if timeout is None else timeout)
        logger.info("Listening on %s:%d …", host, port)
        try:
            conn, addr = server.accept()
        except socket.timeout as exc:
            raise TransportClosed(f"no peer connected to {host}:{port}") from exc
    logger.info("Peer connected from %s:%d", *addr[:2])
    return SocketEndpoint(conn, timeout=timeout)


def connect(
    host: str,
    port: int,
    timeout: float | None = None,
    max_retries: int | None = None,
) -> SocketEndpoint:
    """
    Connect to a listening peer, retrying with exponential back-off.

    Raises ``TransportClosed`` if all retries are exhausted.
    """
    retries = settings.connect_retries if max_retries is None else max_retries
    last_error: OSError | None = None
    for attempt in range(1, retries + 1):
        try:
            sock = socket.create_connection((host, port), timeout=timeout or settings.transport_timeout)
            return SocketEndpoint(sock, timeout=timeout)
        except OSError as exc:
            last_error = exc
            wait = min(2 ** attempt, 16) * 0.25
            logger.warning(
                "Connect attempt %d/%d to %s:%d failed (%s). Retrying in %.2fs …",
                attempt, retries, host, port, exc, wait,
            )
            time.sleep(wait)
    raise TransportClosed(f"could not connect to {host}:{port} after {retries} attempts: {last_error}")


__all__ = ["SocketEndpoint", "listen", "connect", "parse_endpoint", "HEADER_SIZE"]
