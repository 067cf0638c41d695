"""
SplitMix64 – the synchronized PRNG both parties seed identically.

Positions drawn from it are public, so it only needs to be portable and
bit-exact across implementations, not cryptographically strong.
"""

from __future__ import annotations

from typing import List, Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


class SynchronizedPrng:
    """SplitMix64 generator with Fisher–Yates sampling helpers."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform-ish integer in ``[0, bound)`` by multiply-high mapping."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return (self.next_u64() * bound) >> 64

    def sample(self, candidates: Sequence[T], k: int) -> List[T]:
        """First *k* items of a partial Fisher–Yates shuffle of *candidates*."""
        items = list(candidates)
        if not 0 <= k <= len(items):
            raise ValueError(f"cannot sample {k} of {len(items)} items")
        for i in range(k):
            j = i + self.below(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]


def derive_seed(seed: int, index: int) -> int:
    """Per-frame seed: ``seed XOR index`` pushed through one SplitMix64 step."""
    return SynchronizedPrng((seed ^ index) & _MASK64).next_u64()
