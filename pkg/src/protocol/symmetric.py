"""
Symmetric blind reconciliation.

Both parties exchange syndromes, decode the relative syndrome with the
same deterministic decoder, and after every failed decode both reveal
their extended-key bits at the ``d`` least reliable positions the decoder
reported. Those positions become shortened, and decoding starts over.
Bob corrects his key once decoding converges.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.decoder.bp import DecodeRequest, decode
from src.protocol.layout import shrink
from src.protocol.session import (
    PartyState,
    SessionChannel,
    SessionParams,
    SessionResult,
    finish,
    run_pair,
)
from src.protocol.stats import AbortReason, FrameStats, Outcome, ProtocolKind
from src.protocol.verification import check_tag, send_tag
from src.transport.endpoint import Endpoint
from src.transport.loopback import LoopbackTransport
from src.transport.messages import (
    MessageKind,
    pack_bits,
    pack_disclosure,
    positions_digest,
    unpack_bits,
    unpack_disclosure,
)
from src.utils.errors import DesyncDetected

logger = logging.getLogger(__name__)


def round_bound(n: int, s0: int, d: int) -> int:
    """Disclosure rounds after which K ∪ P is guaranteed to be empty."""
    return math.ceil((n - s0) / d)


def symmetric_party(state: PartyState, endpoint: Endpoint, params: SessionParams) -> SessionResult:
    """
    Run one party's side of a symmetric blind session.

    Raises
    ------
    DesyncDetected
        If the parties disagree on session parameters or on a disclosure set.
    TransportClosed
        If the peer goes away.
    """
    ch = SessionChannel(endpoint, state.session_id, is_alice=state.is_alice)
    ch.exchange_init(state.session_init(params))
    code, layout0 = state.code, state.layout

    own = code.syndrome(state.ext)
    ch.send(MessageKind.SYNDROME, pack_bits(own))
    relative = own ^ unpack_bits(ch.recv(MessageKind.SYNDROME), code.m)

    cap = params.max_rounds if params.max_rounds is not None else round_bound(code.n, layout0.s0, params.d)
    e_dec: Optional[np.ndarray] = None
    reason: Optional[AbortReason] = None

    while True:
        if state.layout.exhausted:
            reason = AbortReason.FULL_DISCLOSURE
            break
        if state.round >= cap:
            reason = AbortReason.MAX_ROUNDS
            break

        result = decode(
            DecodeRequest(relative, state.pattern, state.layout, state.q_est, params.d, params.max_iters),
            code,
        )
        ch.record_decode(result)
        if result.converged:
            e_dec = result.e_dec
            break

        positions = list(result.least_reliable)
        ch.send(MessageKind.DISCLOSE, pack_disclosure(positions, state.ext[positions]))
        digest, peer_values = unpack_disclosure(ch.recv(MessageKind.DISCLOSE), len(positions))
        if digest != positions_digest(positions):
            raise DesyncDetected(f"round {state.round}: disclosure sets differ between parties")
        state.apply_disclosure(positions, peer_values)
        logger.debug("Round %d: disclosed %d positions", state.round, len(positions))

    def stats(converged: bool, verified: bool) -> FrameStats:
        return FrameStats.build(
            ProtocolKind.SYMMETRIC, code.code_id, code.n, code.m, layout0.s0, layout0.p0,
            params.d, state.q_est, state.round, state.disclosed_bits, converged, verified,
        )

    if e_dec is None:
        assert reason is not None
        logger.info(
            "Symmetric session %#x aborted (%s) after %d rounds", state.session_id, reason.value, state.round
        )
        return finish(ch, Outcome.ABORTED, np.zeros(0, dtype=np.uint8), stats(False, False), reason)

    corrected_ext = state.ext if state.is_alice else state.ext ^ e_dec
    key = shrink(corrected_ext, layout0.shortened0, layout0.punctured0)
    if state.is_alice:
        verdict = send_tag(ch, key, state.rng_private, params.hash_bits)
    else:
        verdict = check_tag(ch, key, params.hash_bits)
    logger.debug("Symmetric session %#x: %s after %d rounds", state.session_id, verdict.value, state.round)
    return finish(ch, verdict, key, stats(True, verdict is Outcome.VERIFIED))


def run_symmetric_blind(
    alice: PartyState,
    bob: PartyState,
    transport: Optional[LoopbackTransport],
    params: SessionParams,
) -> Tuple[SessionResult, SessionResult]:
    """Run both parties of a symmetric session in-process; returns ``(alice, bob)``."""
    return run_pair(
        lambda ep: symmetric_party(alice, ep, params),
        lambda ep: symmetric_party(bob, ep, params),
        transport,
    )
