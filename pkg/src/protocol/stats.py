"""
Efficiency accounting and per-frame statistics.

All efficiencies divide the information revealed over the channel by the
Shannon limit ``(n - p0 - s0) · h_b(q_est)`` of the raw-key payload.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional

from src.sim.channel import h_binary
from src.utils.errors import ContractViolation


class ProtocolKind(str, Enum):
    SYMMETRIC = "symmetric"
    BLIND = "blind"
    RATE_ADAPTIVE = "rate-adaptive"


class Outcome(str, Enum):
    VERIFIED = "verified"
    ABORTED = "aborted"
    VERIFY_FAILED = "verify_failed"


class AbortReason(str, Enum):
    FULL_DISCLOSURE = "full_disclosure"
    DECODE_FAILURE = "decode_failure"
    MAX_ROUNDS = "max_rounds"


def disclosure_count(rate: float, n: int, alpha: float) -> int:
    """Bits disclosed per extra round: ``ceil(n · (0.028 - 0.02·R) · α)``."""
    if not 0.0 < rate < 1.0:
        raise ContractViolation(f"rate must lie in (0, 1), got {rate!r}")
    if alpha <= 0.0:
        raise ContractViolation(f"alpha must be positive, got {alpha!r}")
    return max(1, math.ceil(n * (0.0280 - 0.02 * rate) * alpha))


def _shannon_limit(n: int, p0: int, s0: int, q_est: float) -> float:
    return (n - p0 - s0) * h_binary(q_est)


def rate_adaptive_efficiency(m: int, n: int, p: int, s: int, q_est: float) -> float:
    return (m - p) / _shannon_limit(n, p, s, q_est)


def blind_efficiency(m: int, n: int, p0: int, s0: int, rounds: int, d: int, q_est: float) -> float:
    """Standard blind: disclosure is capped by the punctured reserve."""
    return (m - p0 + min(rounds * d, p0)) / _shannon_limit(n, p0, s0, q_est)


def symmetric_efficiency(m: int, n: int, p0: int, s0: int, rounds: int, d: int, q_est: float) -> float:
    return (m - p0 + rounds * d) / _shannon_limit(n, p0, s0, q_est)


@dataclass(frozen=True)
class FrameStats:
    """
    Outcome of one reconciled frame.

    Keeps the integer inputs of the efficiency so ``f_final`` can be
    recomputed (see :meth:`recompute_efficiency`). ``residual_errors`` is
    only known to a simulator holding both keys.
    """

    protocol: str
    code_id: str
    n: int
    m: int
    s0: int
    p0: int
    d: int
    q_est: float
    rounds: int
    disclosed: int
    converged: bool
    verified: bool
    f_final: float
    residual_errors: Optional[int] = None

    @classmethod
    def build(
        cls,
        protocol: ProtocolKind,
        code_id: str,
        n: int,
        m: int,
        s0: int,
        p0: int,
        d: int,
        q_est: float,
        rounds: int,
        disclosed: int,
        converged: bool,
        verified: bool,
    ) -> "FrameStats":
        f = efficiency(protocol, m=m, n=n, p0=p0, s0=s0, rounds=rounds, d=d, q_est=q_est)
        return cls(
            protocol=protocol.value, code_id=code_id, n=n, m=m, s0=s0, p0=p0, d=d,
            q_est=q_est, rounds=rounds, disclosed=disclosed, converged=converged,
            verified=verified, f_final=f,
        )

    def recompute_efficiency(self) -> float:
        return efficiency(
            ProtocolKind(self.protocol), m=self.m, n=self.n, p0=self.p0, s0=self.s0,
            rounds=self.rounds, d=self.d, q_est=self.q_est,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def efficiency(
    protocol: ProtocolKind, *, m: int, n: int, p0: int, s0: int, rounds: int, d: int, q_est: float
) -> float:
    if protocol is ProtocolKind.SYMMETRIC:
        return symmetric_efficiency(m, n, p0, s0, rounds, d, q_est)
    if protocol is ProtocolKind.BLIND:
        return blind_efficiency(m, n, p0, s0, rounds, d, q_est)
    return rate_adaptive_efficiency(m, n, p0, s0, q_est)
