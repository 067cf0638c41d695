"""
Extended-frame layout: which positions carry raw key (K), which are
shortened (S, publicly zero) and which are punctured (P, private noise).

Round 0 fixes ``S0`` and ``P0``. Disclosure only ever moves positions into
S, so ``S0 ⊆ S`` and ``P ⊆ P0`` hold for the whole session.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable

import numpy as np

from src.codes.parity import CodeSpec
from src.transport.prng import SynchronizedPrng
from src.utils.errors import ContractViolation, LengthMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameLayout:
    n: int
    shortened: FrozenSet[int]
    punctured: FrozenSet[int]
    shortened0: FrozenSet[int]
    punctured0: FrozenSet[int]

    def __post_init__(self) -> None:
        if self.shortened & self.punctured:
            raise ContractViolation("shortened and punctured positions overlap")
        for name in ("shortened", "punctured", "shortened0", "punctured0"):
            bad = [i for i in getattr(self, name) if not 0 <= i < self.n]
            if bad:
                raise ContractViolation(f"{name} positions out of range: {sorted(bad)[:5]}")
        if not self.shortened0 <= self.shortened or not self.punctured <= self.punctured0:
            raise ContractViolation("disclosure may only move positions into S")

    @classmethod
    def initial(cls, n: int, shortened: Iterable[int] = (), punctured: Iterable[int] = ()) -> "FrameLayout":
        s = frozenset(int(i) for i in shortened)
        p = frozenset(int(i) for i in punctured)
        return cls(n=n, shortened=s, punctured=p, shortened0=s, punctured0=p)

    # ── sizes ────────────────────────────────────────────────────────
    @property
    def s0(self) -> int:
        return len(self.shortened0)

    @property
    def p0(self) -> int:
        return len(self.punctured0)

    @property
    def raw_length(self) -> int:
        """Raw-key bits carried by the frame."""
        return self.n - self.s0 - self.p0

    # ── position arrays (ascending) ──────────────────────────────────
    @cached_property
    def key_positions(self) -> np.ndarray:
        closed = self.shortened | self.punctured
        return np.array([i for i in range(self.n) if i not in closed], dtype=np.int64)

    @cached_property
    def open_positions(self) -> np.ndarray:
        """K ∪ P: everything the decoder may still report."""
        return np.array([i for i in range(self.n) if i not in self.shortened], dtype=np.int64)

    @cached_property
    def shortened_positions(self) -> np.ndarray:
        return np.array(sorted(self.shortened), dtype=np.int64)

    @property
    def exhausted(self) -> bool:
        return len(self.shortened) == self.n

    def disclose(self, positions: Iterable[int]) -> "FrameLayout":
        """Layout after the values at *positions* became public."""
        d = frozenset(int(i) for i in positions)
        if d & self.shortened:
            raise ContractViolation("cannot disclose already-shortened positions")
        return FrameLayout(
            n=self.n,
            shortened=self.shortened | d,
            punctured=self.punctured - d,
            shortened0=self.shortened0,
            punctured0=self.punctured0,
        )


def choose_layout(code: CodeSpec, s: int, p: int, prng: SynchronizedPrng) -> FrameLayout:
    """
    Round-0 layout for *s* shortened and *p* punctured symbols.

    Punctured positions come from the code's untainted list while it is long
    enough; any excess is drawn with the shared PRNG from the other
    positions. Shortened positions are then drawn from what is left.
    """
    n = code.n
    if s < 0 or p < 0 or s + p > n:
        raise ContractViolation(f"invalid counts s={s}, p={p} for n={n}")

    untainted = list(code.untainted)
    if p <= len(untainted):
        punctured = prng.sample(untainted, p)
    else:
        taken = set(untainted)
        rest = [i for i in range(n) if i not in taken]
        punctured = untainted + prng.sample(rest, p - len(untainted))
        logger.debug(
            "Code %s: %d punctures exceed the untainted list (%d); %d drawn at random",
            code.code_id, p, len(untainted), p - len(untainted),
        )

    blocked = set(punctured)
    free = [i for i in range(n) if i not in blocked]
    shortened = prng.sample(free, s)
    return FrameLayout.initial(n, shortened=shortened, punctured=punctured)


def extend(raw: np.ndarray, layout: FrameLayout, rng_private: np.random.Generator) -> np.ndarray:
    """
    Place *raw* into an extended frame: zeros on S, private random bits on
    P, raw bits in ascending order on the remaining positions.
    """
    bits = np.asarray(raw, dtype=np.uint8)
    expected = layout.n - len(layout.shortened) - len(layout.punctured)
    if bits.shape != (expected,):
        raise LengthMismatch(f"raw key has {bits.size} bits, layout expects {expected}")

    ext = np.zeros(layout.n, dtype=np.uint8)
    punctured = np.array(sorted(layout.punctured), dtype=np.int64)
    if punctured.size:
        ext[punctured] = rng_private.integers(0, 2, size=punctured.size, dtype=np.uint8)
    ext[layout.key_positions] = bits
    return ext


def shrink(ext: np.ndarray, shortened0: Iterable[int], punctured0: Iterable[int]) -> np.ndarray:
    """Drop the round-0 shortened and punctured positions, keeping order."""
    bits = np.asarray(ext, dtype=np.uint8)
    drop = np.zeros(bits.size, dtype=bool)
    idx = np.fromiter(set(shortened0) | set(punctured0), dtype=np.int64)
    drop[idx] = True
    return bits[~drop].copy()
