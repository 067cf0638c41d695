"""
Standard blind reconciliation (the one-way baseline).

Alice sends her syndrome once; only Bob decodes. After each failed decode
Bob asks for the values of ``d`` punctured positions picked with the shared
PRNG, Alice answers, and the positions become shortened. The frame is
discarded once the punctured reserve is used up.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np

from src.decoder.bp import DecodeRequest, decode
from src.protocol.layout import FrameLayout, shrink
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
    ResultStatus,
    pack_bits,
    pack_disclosure,
    pack_positions,
    pack_result,
    positions_digest,
    unpack_bits,
    unpack_disclosure,
    unpack_positions,
    unpack_result,
)
from src.utils.errors import DesyncDetected

logger = logging.getLogger(__name__)


def _stop_reason(layout: FrameLayout, rounds: int, max_rounds: Optional[int]) -> Optional[AbortReason]:
    if max_rounds is not None and rounds >= max_rounds:
        return AbortReason.DECODE_FAILURE if max_rounds == 0 else AbortReason.MAX_ROUNDS
    if not layout.punctured:
        return AbortReason.DECODE_FAILURE
    return None


def _next_request(state: PartyState, d: int) -> List[int]:
    reserve = sorted(state.layout.punctured)
    return state.rng_shared.sample(reserve, min(d, len(reserve)))


def one_way_party(
    state: PartyState,
    endpoint: Endpoint,
    params: SessionParams,
    kind: ProtocolKind,
    max_rounds: Optional[int],
) -> SessionResult:
    """
    Shared flow of the standard blind and rate-adaptive protocols.

    With ``max_rounds == 0`` no disclosure is ever requested, which is
    exactly the rate-adaptive exchange.
    """
    ch = SessionChannel(endpoint, state.session_id, is_alice=state.is_alice)
    ch.exchange_init(state.session_init(params))
    code, layout0 = state.code, state.layout
    own = code.syndrome(state.ext)

    e_dec: Optional[np.ndarray] = None
    reason: Optional[AbortReason] = None

    if state.is_alice:
        ch.send(MessageKind.SYNDROME, pack_bits(own))
        while True:
            msg = ch.recv_message(MessageKind.DISCLOSE, MessageKind.RESULT)
            if msg.kind is MessageKind.RESULT:
                status = unpack_result(msg.payload)
                if status is ResultStatus.CONVERGED:
                    break
                if status is not ResultStatus.ABORTED:
                    raise DesyncDetected(f"unexpected result {status.name} during decoding")
                reason = _stop_reason(state.layout, state.round, max_rounds) or AbortReason.DECODE_FAILURE
                break
            positions = unpack_positions(msg.payload)
            if positions != _next_request(state, params.d):
                raise DesyncDetected(f"round {state.round}: requested positions differ from the shared draw")
            ch.send(MessageKind.DISCLOSE, pack_disclosure(positions, state.ext[positions]))
            state.apply_disclosure(positions, None)
    else:
        relative = own ^ unpack_bits(ch.recv(MessageKind.SYNDROME), code.m)
        while True:
            result = decode(
                DecodeRequest(relative, state.pattern, state.layout, state.q_est, params.d, params.max_iters),
                code,
            )
            ch.record_decode(result)
            if result.converged:
                e_dec = result.e_dec
                ch.send(MessageKind.RESULT, pack_result(ResultStatus.CONVERGED))
                break
            reason = _stop_reason(state.layout, state.round, max_rounds)
            if reason is not None:
                ch.send(MessageKind.RESULT, pack_result(ResultStatus.ABORTED))
                break
            positions = _next_request(state, params.d)
            ch.send(MessageKind.DISCLOSE, pack_positions(positions))
            digest, values = unpack_disclosure(ch.recv(MessageKind.DISCLOSE), len(positions))
            if digest != positions_digest(positions):
                raise DesyncDetected(f"round {state.round}: answer does not match the request")
            state.apply_disclosure(positions, values)

    def stats(converged: bool, verified: bool) -> FrameStats:
        return FrameStats.build(
            kind, code.code_id, code.n, code.m, layout0.s0, layout0.p0,
            params.d, state.q_est, state.round, state.disclosed_bits, converged, verified,
        )

    if reason is not None:
        logger.info("%s session %#x aborted (%s) after %d rounds", kind.value, state.session_id, reason.value, state.round)
        return finish(ch, Outcome.ABORTED, np.zeros(0, dtype=np.uint8), stats(False, False), reason)

    if state.is_alice:
        key = shrink(state.ext, layout0.shortened0, layout0.punctured0)
        verdict = send_tag(ch, key, state.rng_private, params.hash_bits)
    else:
        assert e_dec is not None
        key = shrink(state.ext ^ e_dec, layout0.shortened0, layout0.punctured0)
        verdict = check_tag(ch, key, params.hash_bits)
    return finish(ch, verdict, key, stats(True, verdict is Outcome.VERIFIED))


def blind_party(state: PartyState, endpoint: Endpoint, params: SessionParams) -> SessionResult:
    return one_way_party(state, endpoint, params, ProtocolKind.BLIND, params.max_rounds)


def run_standard_blind(
    alice: PartyState,
    bob: PartyState,
    transport: Optional[LoopbackTransport],
    params: SessionParams,
) -> Tuple[SessionResult, SessionResult]:
    """Run both parties of a standard blind session in-process; returns ``(alice, bob)``."""
    return run_pair(
        lambda ep: blind_party(alice, ep, params),
        lambda ep: blind_party(bob, ep, params),
        transport,
    )
