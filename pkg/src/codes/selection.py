"""
Code selection for a target starting efficiency.

For each code the parties compute how many symbols to shorten *or*
puncture so that the extended key reaches ``f_start`` at the estimated
QBER, then keep the code carrying the most raw-key bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

from src.codes.parity import CodePool, CodeSpec
from src.sim.channel import h_binary
from src.utils.errors import ContractViolation, NoUsableCode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeChoice:
    """A code together with its round-0 shortened/punctured counts."""

    code: CodeSpec
    s: int
    p: int

    @property
    def payload(self) -> int:
        """Raw-key bits carried by one extended frame."""
        return self.code.n - self.s - self.p

    def __iter__(self):
        return iter((self.code, self.s, self.p))


def adapt_counts(code: CodeSpec, q_est: float, f_start: float) -> Optional[CodeChoice]:
    """
    Shortened/punctured counts for one code, or ``None`` if disqualified.

    ``p = floor((m - n·h·f) / (1 - h·f))`` when the unadapted efficiency
    ``f0 = m / (n·h)`` exceeds ``f_start``; ``s = ceil(n - m / (h·f))``
    when it falls short; both zero on equality. A code is disqualified once
    ``s >= n - m`` or ``p >= m``.
    """
    h = h_binary(q_est)
    n, m = code.n, code.m
    f0 = m / (n * h)
    s = p = 0
    if f0 > f_start:
        p = math.floor((m - n * h * f_start) / (1.0 - h * f_start))
    elif f0 < f_start:
        s = math.ceil(n - m / (h * f_start))
    if s >= n - m or p >= m:
        return None
    return CodeChoice(code=code, s=s, p=p)


def select_code(pool: CodePool, q_est: float, f_start: float = 1.0) -> CodeChoice:
    """
    Pick the code with the largest raw-key payload ``n - p - s``.

    Ties go to the higher rate, then to pool order.

    Raises
    ------
    ContractViolation
        If ``q_est`` is outside ``(0, 1/2)`` or ``f_start < 1``.
    NoUsableCode
        If every code is disqualified.
    """
    if not 0.0 < q_est < 0.5:
        raise ContractViolation(f"q_est must lie in (0, 0.5), got {q_est!r}")
    if f_start < 1.0:
        raise ContractViolation(f"f_start must be >= 1, got {f_start!r}")

    choices: List[CodeChoice] = []
    for code in pool:
        choice = adapt_counts(code, q_est, f_start)
        if choice is None:
            logger.debug("Code %s disqualified at q_est=%.4f", code.code_id, q_est)
            continue
        choices.append(choice)

    if not choices:
        raise NoUsableCode(f"no code in the pool is usable at q_est={q_est}, f_start={f_start}")

    # max() keeps the first of equal keys, which is pool order.
    best = max(choices, key=lambda c: (c.payload, c.code.rate))
    logger.info(
        "Selected code %s (s=%d, p=%d, payload=%d) for q_est=%.4f",
        best.code.code_id, best.s, best.p, best.payload, q_est,
    )
    return best
