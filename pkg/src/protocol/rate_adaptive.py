"""
One-shot rate-adaptive reconciliation: a single syndrome from Alice to
Bob, one decode, then verification or abort.
"""

from __future__ import annotations

from typing import Optional, Tuple

from src.protocol.blind import one_way_party
from src.protocol.session import PartyState, SessionParams, SessionResult, run_pair
from src.protocol.stats import ProtocolKind
from src.transport.endpoint import Endpoint
from src.transport.loopback import LoopbackTransport


def rate_adaptive_party(state: PartyState, endpoint: Endpoint, params: SessionParams) -> SessionResult:
    return one_way_party(state, endpoint, params, ProtocolKind.RATE_ADAPTIVE, max_rounds=0)


def run_rate_adaptive(
    alice: PartyState,
    bob: PartyState,
    transport: Optional[LoopbackTransport],
    params: SessionParams,
) -> Tuple[SessionResult, SessionResult]:
    return run_pair(
        lambda ep: rate_adaptive_party(alice, ep, params),
        lambda ep: rate_adaptive_party(bob, ep, params),
        transport,
    )
