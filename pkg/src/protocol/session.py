"""
Session plumbing shared by the three reconciliation protocols.

* :class:`PartyState` – one party's view of a frame.
* :class:`SessionChannel` – typed send/receive over an endpoint, with
  per-direction round counters, session-id checks and transcript digests.
* :func:`run_pair` – run Alice and Bob on two threads over a loopback
  transport, closing the failing side so its peer never hangs.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.codes.parity import CodeSpec
from src.decoder.bp import DecodeOutcome
from src.protocol.layout import FrameLayout, choose_layout, extend
from src.protocol.stats import AbortReason, FrameStats, Outcome
from src.transport.endpoint import Endpoint
from src.transport.loopback import LoopbackTransport
from src.transport.messages import MessageKind, ProtocolMessage, SessionInit
from src.transport.prng import SynchronizedPrng
from src.utils.config import settings
from src.utils.errors import DesyncDetected, TransportClosed

logger = logging.getLogger(__name__)


class Role(IntEnum):
    ALICE = 0
    BOB = 1


@dataclass(frozen=True)
class SessionParams:
    """Per-session protocol parameters; both parties must agree on them."""

    d: int
    f_start: float = 1.0
    alpha: float = 1.0
    max_rounds: Optional[int] = None
    max_iters: int = settings.max_iters
    hash_bits: int = settings.hash_bits


@dataclass
class PartyState:
    role: Role
    raw: np.ndarray
    ext: np.ndarray
    pattern: np.ndarray
    layout: FrameLayout
    code: CodeSpec
    q_est: float
    seed: int
    rng_shared: SynchronizedPrng
    rng_private: np.random.Generator
    session_id: int
    round: int = 0
    disclosed_bits: int = 0

    @classmethod
    def create(
        cls,
        role: Role,
        raw: np.ndarray,
        code: CodeSpec,
        s: int,
        p: int,
        q_est: float,
        seed: int,
        rng_private: np.random.Generator,
        session_id: Optional[int] = None,
    ) -> "PartyState":
        """
        Choose the round-0 layout from the shared seed and extend *raw*.

        Raises ``LengthMismatch`` if ``len(raw) != n - s - p``.
        """
        prng = SynchronizedPrng(seed)
        layout = choose_layout(code, s, p, prng)
        ext = extend(raw, layout, rng_private)
        return cls(
            role=role,
            raw=np.asarray(raw, dtype=np.uint8),
            ext=ext,
            pattern=np.zeros(code.n, dtype=np.uint8),
            layout=layout,
            code=code,
            q_est=q_est,
            seed=seed,
            rng_shared=prng,
            rng_private=rng_private,
            session_id=seed if session_id is None else session_id,
        )

    @property
    def is_alice(self) -> bool:
        return self.role is Role.ALICE

    def session_init(self, params: SessionParams) -> SessionInit:
        return SessionInit(
            code_id=self.code.code_id,
            q_est=self.q_est,
            f_start=params.f_start,
            alpha=params.alpha,
            d=params.d,
            seed=self.seed,
            role=int(self.role),
        )

    def apply_disclosure(self, positions: Sequence[int], peer_values: Optional[np.ndarray]) -> None:
        """Move *positions* into S; with the peer's values, also fix the pattern there."""
        idx = np.asarray(positions, dtype=np.int64)
        if peer_values is not None:
            self.pattern[idx] = self.ext[idx] ^ np.asarray(peer_values, dtype=np.uint8)
        self.layout = self.layout.disclose(positions)
        self.round += 1
        self.disclosed_bits += len(positions)


@dataclass(frozen=True)
class SessionResult:
    """
    What a party ends a session with.

    ``corrected`` is the party's final key: Alice's raw key, or Bob's
    corrected key. It is empty when the session aborted.
    """

    outcome: Outcome
    corrected: np.ndarray
    stats: FrameStats
    abort_reason: Optional[AbortReason] = None
    transcript: str = ""
    decode_digest: str = ""
    d_history: Tuple[Tuple[int, ...], ...] = field(default=())


class SessionChannel:
    """Message I/O for one session over a shared endpoint."""

    def __init__(self, endpoint: Endpoint, session_id: int, *, is_alice: bool) -> None:
        self.endpoint = endpoint
        self.session_id = session_id
        self._is_alice = is_alice
        self._out_round = 0
        self._from_alice = hashlib.blake2b(digest_size=16)
        self._from_bob = hashlib.blake2b(digest_size=16)
        self._decodes = hashlib.blake2b(digest_size=16)
        self.d_history: list[Tuple[int, ...]] = []

    # ── I/O ──────────────────────────────────────────────────────────
    def send(self, kind: MessageKind, payload: bytes = b"") -> None:
        msg = ProtocolMessage(kind, self.session_id, self._out_round, payload)
        self._out_round += 1
        self.endpoint.send(msg)
        self._record(msg, mine=True)

    def recv_message(self, *kinds: MessageKind) -> ProtocolMessage:
        msg = self.endpoint.recv()
        if msg.session_id != self.session_id:
            raise DesyncDetected(
                f"message for session {msg.session_id:#x} while running {self.session_id:#x}"
            )
        if msg.kind not in kinds:
            expected = "/".join(k.name for k in kinds)
            raise DesyncDetected(f"expected {expected}, received {msg.kind.name}")
        self._record(msg, mine=False)
        return msg

    def recv(self, kind: MessageKind) -> bytes:
        return self.recv_message(kind).payload

    def exchange_init(self, own: SessionInit) -> SessionInit:
        """Send our SessionInit, read the peer's, and insist they agree."""
        self.send(MessageKind.SESSION_INIT, own.to_payload())
        peer = SessionInit.from_payload(self.recv(MessageKind.SESSION_INIT))
        if not own.agrees_with(peer):
            raise DesyncDetected(f"session parameters disagree: ours {own}, peer {peer}")
        return peer

    # ── digests ──────────────────────────────────────────────────────
    def _record(self, msg: ProtocolMessage, *, mine: bool) -> None:
        if msg.kind is MessageKind.SESSION_INIT:
            return
        from_alice = mine == self._is_alice
        (self._from_alice if from_alice else self._from_bob).update(msg.encode())

    def record_decode(self, outcome: DecodeOutcome) -> None:
        h = self._decodes
        h.update(outcome.status.value.encode())
        h.update(outcome.iterations.to_bytes(4, "big"))
        h.update(np.asarray(outcome.least_reliable, dtype=">u4").tobytes())
        if outcome.e_dec is not None:
            h.update(np.packbits(outcome.e_dec, bitorder="little").tobytes())
        if not outcome.converged:
            self.d_history.append(outcome.least_reliable)

    def transcript(self) -> str:
        """Digest of every non-init frame, identical on both sides."""
        return hashlib.blake2b(
            self._from_alice.digest() + self._from_bob.digest(), digest_size=16
        ).hexdigest()

    def decode_digest(self) -> str:
        return self._decodes.hexdigest()


def finish(
    channel: SessionChannel,
    outcome: Outcome,
    corrected: np.ndarray,
    stats: FrameStats,
    reason: Optional[AbortReason] = None,
) -> SessionResult:
    return SessionResult(
        outcome=outcome,
        corrected=corrected,
        stats=stats,
        abort_reason=reason,
        transcript=channel.transcript(),
        decode_digest=channel.decode_digest(),
        d_history=tuple(channel.d_history),
    )


PartyFn = Callable[[Endpoint], SessionResult]


def _guarded(fn: PartyFn, endpoint: Endpoint) -> SessionResult:
    try:
        return fn(endpoint)
    except BaseException:
        endpoint.close()
        raise


def run_pair(
    alice_fn: PartyFn,
    bob_fn: PartyFn,
    transport: Optional[LoopbackTransport] = None,
) -> Tuple[SessionResult, SessionResult]:
    """
    Run both parties concurrently and return ``(alice, bob)`` results.

    If either side fails, the root-cause exception is re-raised in
    preference to the ``TransportClosed`` its peer sees afterwards.
    """
    transport = transport if transport is not None else LoopbackTransport()
    with ThreadPoolExecutor(max_workers=2, thread_name_prefix="party") as pool:
        fa = pool.submit(_guarded, alice_fn, transport.alice)
        fb = pool.submit(_guarded, bob_fn, transport.bob)
        wait([fa, fb])

    errors = [e for e in (fa.exception(), fb.exception()) if e is not None]
    if errors:
        root = next((e for e in errors if not isinstance(e, TransportClosed)), errors[0])
        raise root
    return fa.result(), fb.result()
