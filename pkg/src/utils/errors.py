"""
Exception hierarchy shared by every layer.

Library code raises these; only ``src.main`` maps them onto exit codes.
"""

from __future__ import annotations


class ReconcileError(Exception):
    """Base class for all toolkit errors."""


class AlistParseError(ReconcileError, ValueError):
    """Malformed alist input. ``line`` is 1-based, 0 when unknown."""

    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ContractViolation(ReconcileError, ValueError):
    """A caller broke an operation's precondition (dimensions, ranges)."""


class LengthMismatch(ContractViolation):
    """A bit vector does not have the length the frame layout requires."""


class NoUsableCode(ReconcileError):
    """Every code in the pool was disqualified for the requested QBER."""


class TransportError(ReconcileError):
    """Base class for message-delivery failures."""


class TransportClosed(TransportError):
    """The peer closed the channel, or a receive timed out."""


class FrameCorrupt(TransportError):
    """A received frame violates the wire format or ordering rules."""


class DesyncDetected(ReconcileError):
    """The two parties' views of the session diverged."""
