"""
Wire format for reconciliation messages.

Every frame is::

    uint32 BE  frame length (bytes that follow)
    uint8      kind tag
    uint64 BE  session id
    uint32 BE  round (per-session, per-direction message counter)
    bytes      payload

Bit vectors are packed LSB-first within each byte. Floating-point values
travel as raw IEEE-754 binary64 so both sides decode bit-identical numbers.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from src.utils.errors import FrameCorrupt

_HEADER = struct.Struct(">BQI")
_LENGTH = struct.Struct(">I")
HEADER_SIZE = _LENGTH.size + _HEADER.size
MAX_FRAME = 1 << 26


class MessageKind(IntEnum):
    SESSION_INIT = 0x00
    SYNDROME = 0x01
    DISCLOSE = 0x02
    VERIFY_TAG = 0x03
    RESULT = 0x04


class ResultStatus(IntEnum):
    CONVERGED = 0
    VERIFIED = 1
    VERIFY_FAILED = 2
    ABORTED = 3


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    session_id: int
    round: int
    payload: bytes = b""

    def encode(self) -> bytes:
        body = _HEADER.pack(int(self.kind), self.session_id, self.round) + self.payload
        return _LENGTH.pack(len(body)) + body


def decode_message(frame: bytes) -> ProtocolMessage:
    """
    Parse one complete frame (length prefix included).

    Raises ``FrameCorrupt`` on length mismatch or an unknown kind tag.
    """
    if len(frame) < HEADER_SIZE:
        raise FrameCorrupt(f"frame of {len(frame)} bytes is shorter than the header")
    (length,) = _LENGTH.unpack_from(frame)
    if length != len(frame) - _LENGTH.size:
        raise FrameCorrupt(f"length field says {length}, frame carries {len(frame) - _LENGTH.size}")
    return decode_body(frame[_LENGTH.size:])


def decode_body(body: bytes) -> ProtocolMessage:
    if len(body) < _HEADER.size:
        raise FrameCorrupt("frame body shorter than the header")
    tag, session_id, round_ = _HEADER.unpack_from(body)
    try:
        kind = MessageKind(tag)
    except ValueError as exc:
        raise FrameCorrupt(f"unknown kind tag 0x{tag:02x}") from exc
    return ProtocolMessage(kind=kind, session_id=session_id, round=round_, payload=bytes(body[_HEADER.size:]))


def frame_length(prefix: bytes) -> int:
    """Body length announced by a 4-byte prefix."""
    (length,) = _LENGTH.unpack(prefix)
    if length < _HEADER.size or length > MAX_FRAME:
        raise FrameCorrupt(f"implausible frame length {length}")
    return length


# ------------------------------------------------------------------
# Payload codecs
# ------------------------------------------------------------------
def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(data: bytes, count: int) -> np.ndarray:
    if len(data) != (count + 7) // 8:
        raise FrameCorrupt(f"{len(data)} bytes cannot hold exactly {count} packed bits")
    raw = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(raw, count=count, bitorder="little").astype(np.uint8)


def pack_positions(positions: Sequence[int]) -> bytes:
    return _LENGTH.pack(len(positions)) + np.asarray(positions, dtype=">u4").tobytes()


def unpack_positions(data: bytes) -> list[int]:
    if len(data) < _LENGTH.size:
        raise FrameCorrupt("position list lacks its count")
    (count,) = _LENGTH.unpack_from(data)
    if len(data) != _LENGTH.size + 4 * count:
        raise FrameCorrupt(f"position list announces {count} entries, carries {(len(data) - 4) / 4}")
    return np.frombuffer(data, dtype=">u4", offset=_LENGTH.size).astype(np.int64).tolist()


def positions_digest(positions: Sequence[int]) -> bytes:
    """8-byte digest of an ordered position list."""
    return hashlib.blake2b(pack_positions(positions), digest_size=8).digest()


_DISCLOSE_DIGEST = 8


def pack_disclosure(positions: Sequence[int], values: np.ndarray) -> bytes:
    """Digest of the position list followed by the packed bit values."""
    return positions_digest(positions) + pack_bits(values)


def unpack_disclosure(data: bytes, count: int) -> tuple[bytes, np.ndarray]:
    if len(data) < _DISCLOSE_DIGEST:
        raise FrameCorrupt("disclosure lacks its position digest")
    return data[:_DISCLOSE_DIGEST], unpack_bits(data[_DISCLOSE_DIGEST:], count)


_TAG = struct.Struct(">QQ")


def pack_verify_tag(seed: int, tag: int) -> bytes:
    return _TAG.pack(seed, tag)


def unpack_verify_tag(data: bytes) -> tuple[int, int]:
    if len(data) != _TAG.size:
        raise FrameCorrupt(f"verification tag payload must be {_TAG.size} bytes")
    seed, tag = _TAG.unpack(data)
    return seed, tag


def pack_result(status: ResultStatus) -> bytes:
    return bytes([int(status)])


def unpack_result(data: bytes) -> ResultStatus:
    if len(data) != 1:
        raise FrameCorrupt("result payload must be one byte")
    try:
        return ResultStatus(data[0])
    except ValueError as exc:
        raise FrameCorrupt(f"unknown result status {data[0]}") from exc


# ------------------------------------------------------------------
# SessionInit
# ------------------------------------------------------------------
_INIT_FIXED = struct.Struct(">dddIQB")


@dataclass(frozen=True)
class SessionInit:
    """Session parameters each party announces before reconciling."""

    code_id: str
    q_est: float
    f_start: float
    alpha: float
    d: int
    seed: int
    role: int  # 0 = Alice, 1 = Bob

    def to_payload(self) -> bytes:
        name = self.code_id.encode("utf-8")
        return (
            struct.pack(">H", len(name))
            + name
            + _INIT_FIXED.pack(self.q_est, self.f_start, self.alpha, self.d, self.seed, self.role)
        )

    @classmethod
    def from_payload(cls, data: bytes) -> "SessionInit":
        if len(data) < 2:
            raise FrameCorrupt("SessionInit payload too short")
        (name_len,) = struct.unpack_from(">H", data)
        if len(data) != 2 + name_len + _INIT_FIXED.size:
            raise FrameCorrupt("SessionInit payload length does not match its code id")
        try:
            code_id = data[2:2 + name_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FrameCorrupt("SessionInit code id is not UTF-8") from exc
        q_est, f_start, alpha, d, seed, role = _INIT_FIXED.unpack_from(data, 2 + name_len)
        return cls(code_id, q_est, f_start, alpha, d, seed, role)

    def agrees_with(self, peer: "SessionInit") -> bool:
        """Field-for-field equality, with complementary roles."""
        shared = (self.code_id, _bits(self.q_est), _bits(self.f_start), _bits(self.alpha), self.d, self.seed)
        other = (peer.code_id, _bits(peer.q_est), _bits(peer.f_start), _bits(peer.alpha), peer.d, peer.seed)
        return shared == other and self.role != peer.role


def _bits(x: float) -> int:
    (v,) = struct.unpack(">Q", struct.pack(">d", x))
    return v
