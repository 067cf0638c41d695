"""
Single-frame simulation: draw a raw key, push it through the channel,
reconcile it with one protocol over a loopback transport, and compare the
result with the ground truth only the simulator knows.

Randomness per frame is derived from ``(seed, frame index)``:

* ``default_rng([fs, 0])`` – raw key and channel noise,
* ``default_rng([fs, 1])`` / ``default_rng([fs, 2])`` – Alice's / Bob's
  private bits (punctured values, verification seed),
* ``fs`` itself – the shared position PRNG and the session id.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from src.codes.parity import CodeSpec
from src.protocol.blind import blind_party
from src.protocol.rate_adaptive import rate_adaptive_party
from src.protocol.session import PartyState, Role, SessionParams, SessionResult, run_pair
from src.protocol.stats import FrameStats, Outcome, ProtocolKind
from src.protocol.symmetric import symmetric_party
from src.sim.channel import ChannelModel, transmit
from src.transport.endpoint import Endpoint
from src.transport.prng import derive_seed

logger = logging.getLogger(__name__)

PartyFunction = Callable[[PartyState, Endpoint, SessionParams], SessionResult]

PARTY_FUNCTIONS: Dict[ProtocolKind, PartyFunction] = {
    ProtocolKind.SYMMETRIC: symmetric_party,
    ProtocolKind.BLIND: blind_party,
    ProtocolKind.RATE_ADAPTIVE: rate_adaptive_party,
}


@dataclass(frozen=True)
class FrameSetup:
    """Everything shared by all frames of one grid point."""

    code: CodeSpec
    s: int
    p: int
    q: float
    q_est: float
    alpha: float
    params: SessionParams


@dataclass(frozen=True)
class FrameInputs:
    index: int
    frame_seed: int
    alice_raw: np.ndarray
    bob_raw: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class FrameRecord:
    """One reconciled frame, as written to the JSON-lines log."""

    index: int
    q: float
    alpha: float
    outcome: Outcome
    abort_reason: Optional[str]
    stats: FrameStats
    transcript: str

    def to_dict(self) -> Dict[str, Any]:
        row = self.stats.to_dict()
        row.update(
            frame=self.index,
            q=self.q,
            alpha=self.alpha,
            outcome=self.outcome.value,
            abort_reason=self.abort_reason,
            transcript=self.transcript,
        )
        return row


def frame_inputs(setup: FrameSetup, seed: int, index: int) -> FrameInputs:
    """Raw keys for frame *index*; independent of the protocol being run."""
    fs = derive_seed(seed, index)
    rng = np.random.default_rng([fs, 0])
    raw_length = setup.code.n - setup.s - setup.p
    x = rng.integers(0, 2, size=raw_length, dtype=np.uint8)
    tx = transmit(x, ChannelModel(setup.q, rng))
    return FrameInputs(index=index, frame_seed=fs, alice_raw=x, bob_raw=tx.received, mask=tx.mask)


def make_parties(setup: FrameSetup, inputs: FrameInputs) -> Tuple[PartyState, PartyState]:
    fs = inputs.frame_seed
    alice = PartyState.create(
        Role.ALICE, inputs.alice_raw, setup.code, setup.s, setup.p, setup.q_est, fs,
        np.random.default_rng([fs, 1]),
    )
    bob = PartyState.create(
        Role.BOB, inputs.bob_raw, setup.code, setup.s, setup.p, setup.q_est, fs,
        np.random.default_rng([fs, 2]),
    )
    return alice, bob


def simulate_frame(setup: FrameSetup, kind: ProtocolKind, seed: int, index: int) -> FrameRecord:
    """Reconcile frame *index* with protocol *kind* and attach ground truth."""
    inputs = frame_inputs(setup, seed, index)
    alice, bob = make_parties(setup, inputs)
    party = PARTY_FUNCTIONS[kind]
    _, bob_result = run_pair(
        lambda ep: party(alice, ep, setup.params),
        lambda ep: party(bob, ep, setup.params),
    )

    residual: Optional[int] = None
    if bob_result.outcome is not Outcome.ABORTED:
        residual = int(np.count_nonzero(bob_result.corrected != inputs.alice_raw))
        if residual and bob_result.outcome is Outcome.VERIFIED:
            logger.error(
                "Frame %d (%s, q=%.4f): verified key still has %d residual errors",
                index, kind.value, setup.q, residual,
            )

    return FrameRecord(
        index=index,
        q=setup.q,
        alpha=setup.alpha,
        outcome=bob_result.outcome,
        abort_reason=bob_result.abort_reason.value if bob_result.abort_reason else None,
        stats=replace(bob_result.stats, residual_errors=residual),
        transcript=bob_result.transcript,
    )
