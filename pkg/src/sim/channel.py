"""
Binary symmetric channel and the Shannon binary entropy it is measured by.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def h_binary(q: float) -> float:
    """
    Shannon binary entropy ``-q log2 q - (1-q) log2 (1-q)`` with ``0·log2 0 = 0``.

    Raises ``ValueError`` outside ``[0, 1]``.
    """
    if not 0.0 <= q <= 1.0 or math.isnan(q):
        raise ValueError(f"h_binary is defined on [0, 1], got {q!r}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


@dataclass(frozen=True)
class Transmission:
    """Channel output together with the flip mask that produced it."""

    received: np.ndarray
    mask: np.ndarray


class ChannelModel:
    """
    Binary symmetric channel with crossover probability *q* (the QBER).

    The generator is owned by the channel so frames drawn from one model
    form a single reproducible stream.
    """

    def __init__(self, q: float, rng: np.random.Generator) -> None:
        if not 0.0 <= q < 0.5:
            raise ValueError(f"crossover probability must lie in [0, 0.5), got {q!r}")
        self.q = q
        self.rng = rng

    def __repr__(self) -> str:
        return f"ChannelModel(q={self.q})"


def transmit(x: np.ndarray, channel: ChannelModel) -> Transmission:
    """Flip every bit of *x* independently with probability ``channel.q``."""
    bits = np.asarray(x, dtype=np.uint8)
    mask = (channel.rng.random(bits.size) < channel.q).astype(np.uint8)
    return Transmission(received=bits ^ mask, mask=mask)
