"""
Key verification with an ε-universal polynomial hash over GF(2^64).

The key is split into little-endian 64-bit blocks (LSB-first bit packing),
followed by one block holding the bit length. The tag is the Horner
evaluation ``acc = (acc ⊕ block) · k`` at the secret point ``k`` (the
seed). Two different keys of ℓ bits collide for at most ``(ℓ/64 + 2)``
points, i.e. with probability well below ``ℓ / 2^63``.
"""

from __future__ import annotations

import logging
from typing import Protocol

import numpy as np

from src.transport.messages import (
    MessageKind,
    ResultStatus,
    pack_bits,
    pack_result,
    pack_verify_tag,
    unpack_result,
    unpack_verify_tag,
)
from src.protocol.session import SessionChannel
from src.protocol.stats import Outcome
from src.utils.config import settings
from src.utils.errors import ContractViolation, DesyncDetected, LengthMismatch

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
# x^64 + x^4 + x^3 + x + 1
_REDUCTION = 0x1B


def gf64_mul(a: int, b: int) -> int:
    """Carry-less product of two field elements, reduced mod the field polynomial."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        carry = a >> 63
        a = (a << 1) & _MASK64
        if carry:
            a ^= _REDUCTION
    return result


class PolynomialHashVerifier:
    """Tags bit vectors with a polynomial hash truncated to ``hash_bits``."""

    def __init__(self, hash_bits: int = settings.hash_bits) -> None:
        if not 1 <= hash_bits <= 64:
            raise ContractViolation(f"hash_bits must be in [1, 64], got {hash_bits}")
        self.hash_bits = hash_bits
        self._mask = (1 << hash_bits) - 1

    @staticmethod
    def _blocks(bits: np.ndarray) -> list[int]:
        packed = pack_bits(bits)
        packed += b"\x00" * (-len(packed) % 8)
        words = np.frombuffer(packed, dtype="<u8").tolist() if packed else []
        return [int(w) for w in words] + [int(np.asarray(bits).size)]

    def compute_tag(self, bits: np.ndarray, seed: int) -> int:
        key = seed & _MASK64
        acc = 0
        for block in self._blocks(bits):
            acc = gf64_mul(acc ^ block, key)
        return acc & self._mask

    def verify(self, tag: int, bits: np.ndarray, seed: int) -> bool:
        return tag == self.compute_tag(bits, seed)


class _Channel(Protocol):
    def send(self, kind: MessageKind, payload: bytes) -> None: ...
    def recv(self, kind: MessageKind) -> bytes: ...


def send_tag(channel: _Channel, key: np.ndarray, rng_private: np.random.Generator, hash_bits: int) -> Outcome:
    """Alice's half: send ``(seed, tag)`` and wait for Bob's verdict."""
    seed = int.from_bytes(rng_private.bytes(8), "big")
    tag = PolynomialHashVerifier(hash_bits).compute_tag(key, seed)
    channel.send(MessageKind.VERIFY_TAG, pack_verify_tag(seed, tag))
    status = unpack_result(channel.recv(MessageKind.RESULT))
    if status is ResultStatus.VERIFIED:
        return Outcome.VERIFIED
    if status is ResultStatus.VERIFY_FAILED:
        return Outcome.VERIFY_FAILED
    raise DesyncDetected(f"unexpected result {status.name} after verification tag")


def check_tag(channel: _Channel, key: np.ndarray, hash_bits: int) -> Outcome:
    """Bob's half: compare the received tag against his corrected key."""
    seed, tag = unpack_verify_tag(channel.recv(MessageKind.VERIFY_TAG))
    ok = PolynomialHashVerifier(hash_bits).verify(tag, key, seed)
    channel.send(MessageKind.RESULT, pack_result(ResultStatus.VERIFIED if ok else ResultStatus.VERIFY_FAILED))
    if not ok:
        logger.warning("Verification failed: keys differ after reconciliation")
    return Outcome.VERIFIED if ok else Outcome.VERIFY_FAILED


def verify(
    alice_key: np.ndarray,
    bob_key: np.ndarray,
    transport,
    hash_bits: int = settings.hash_bits,
    rng: np.random.Generator | None = None,
    session_id: int | None = None,
) -> Outcome:
    """
    Stand-alone verification of two keys over a loopback transport.

    Returns ``Outcome.VERIFIED`` or ``Outcome.VERIFY_FAILED``.
    """
    a = np.asarray(alice_key, dtype=np.uint8)
    b = np.asarray(bob_key, dtype=np.uint8)
    if a.shape != b.shape:
        raise LengthMismatch(f"keys differ in length: {a.size} vs {b.size}")
    rng = rng if rng is not None else np.random.default_rng()

    seed = int.from_bytes(rng.bytes(8), "big")
    sid = seed if session_id is None else session_id
    alice = SessionChannel(transport.alice, sid, is_alice=True)
    bob = SessionChannel(transport.bob, sid, is_alice=False)
    verifier = PolynomialHashVerifier(hash_bits)
    alice.send(MessageKind.VERIFY_TAG, pack_verify_tag(seed, verifier.compute_tag(a, seed)))
    verdict = check_tag(bob, b, hash_bits)
    unpack_result(alice.recv(MessageKind.RESULT))
    return verdict
