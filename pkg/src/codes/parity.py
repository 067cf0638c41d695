"""
Parity-check matrices held as Tanner-graph adjacency lists.

A :class:`CodeSpec` never stores a dense matrix: ``rows[j]`` lists the
symbols of check ``j`` and ``cols[i]`` the checks of symbol ``i``. The
padded numpy views the decoder works on are derived lazily and cached on
the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.utils.errors import ContractViolation

IndexLists = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class TannerGraph:
    """
    Edge-indexed view of a code used by the decoder.

    Edges are numbered row-major: all edges of check 0 in ``rows[0]`` order,
    then check 1, and so on. Padding slots in the 2-D arrays hold the
    sentinel index ``num_edges`` (or ``n`` for symbol indices).
    """

    num_edges: int
    edge_symbol: np.ndarray  # (E,) symbol index of each edge
    row_edges: np.ndarray  # (m, max row degree) edge ids, padded with E
    row_symbols: np.ndarray  # (m, max row degree) symbol ids, padded with n
    col_edges: np.ndarray  # (n, max col degree) edge ids, padded with E
    row_mask: np.ndarray  # (m, max row degree) True on real edges


@dataclass(frozen=True)
class CodeSpec:
    """An LDPC code: ``m`` checks over ``n`` symbols."""

    n: int
    m: int
    rows: IndexLists
    cols: IndexLists
    code_id: str = ""
    untainted: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not 0 < self.m < self.n:
            raise ContractViolation(f"need 0 < m < n, got m={self.m}, n={self.n}")
        if len(self.rows) != self.m or len(self.cols) != self.n:
            raise ContractViolation("adjacency list counts do not match (m, n)")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    @classmethod
    def from_rows(
        cls, n: int, rows: Sequence[Iterable[int]], code_id: str = ""
    ) -> "CodeSpec":
        """Build a code from check adjacency; ``cols`` is derived."""
        row_lists = tuple(tuple(int(i) for i in r) for r in rows)
        return cls(
            n=n,
            m=len(row_lists),
            rows=row_lists,
            cols=transpose(row_lists, n),
            code_id=code_id,
        )

    @classmethod
    def from_dense(cls, matrix: np.ndarray | Sequence[Sequence[int]], code_id: str = "") -> "CodeSpec":
        h = np.asarray(matrix, dtype=np.uint8)
        if h.ndim != 2:
            raise ContractViolation("parity-check matrix must be 2-D")
        rows = [np.flatnonzero(h[j]).tolist() for j in range(h.shape[0])]
        return cls.from_rows(h.shape[1], rows, code_id=code_id)

    def with_untainted(self, positions: Sequence[int]) -> "CodeSpec":
        return replace(self, untainted=tuple(int(p) for p in positions))

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    @property
    def rate(self) -> float:
        return 1.0 - self.m / self.n

    @property
    def p_max(self) -> int:
        return len(self.untainted)

    @property
    def num_edges(self) -> int:
        return sum(len(r) for r in self.rows)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for j, row in enumerate(self.rows):
            h[j, list(row)] = 1
        return h

    def check_duality(self) -> None:
        """Raise ``ContractViolation`` unless ``rows`` and ``cols`` agree."""
        if transpose(self.rows, self.n) != tuple(tuple(sorted(c)) for c in self.cols):
            raise ContractViolation(f"{self.code_id or 'code'}: rows and cols disagree")

    @cached_property
    def graph(self) -> TannerGraph:
        n, m = self.n, self.m
        degrees = [len(r) for r in self.rows]
        num_edges = sum(degrees)
        max_row = max(degrees) if degrees else 0
        max_col = max((len(c) for c in self.cols), default=0)

        row_edges = np.full((m, max(max_row, 1)), num_edges, dtype=np.int64)
        row_symbols = np.full((m, max(max_row, 1)), n, dtype=np.int64)
        edge_symbol = np.empty(num_edges, dtype=np.int64)
        edge_of: dict[tuple[int, int], int] = {}
        e = 0
        for j, row in enumerate(self.rows):
            for k, i in enumerate(row):
                row_edges[j, k] = e
                row_symbols[j, k] = i
                edge_symbol[e] = i
                edge_of[(j, i)] = e
                e += 1

        col_edges = np.full((n, max(max_col, 1)), num_edges, dtype=np.int64)
        for i, col in enumerate(self.cols):
            for k, j in enumerate(col):
                col_edges[i, k] = edge_of[(j, i)]

        return TannerGraph(
            num_edges=num_edges,
            edge_symbol=edge_symbol,
            row_edges=row_edges,
            row_symbols=row_symbols,
            col_edges=col_edges,
            row_mask=row_edges < num_edges,
        )

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        """``H·bits mod 2`` as a uint8 vector of length ``m``."""
        x = np.asarray(bits, dtype=np.uint8)
        if x.shape != (self.n,):
            raise ContractViolation(f"expected {self.n} bits, got shape {x.shape}")
        padded = np.append(x, np.uint8(0))
        return np.bitwise_xor.reduce(padded[self.graph.row_symbols], axis=1).astype(np.uint8)

    def __repr__(self) -> str:
        return f"CodeSpec(id={self.code_id!r}, n={self.n}, m={self.m}, rate={self.rate:.4f})"


def transpose(rows: IndexLists, n: int) -> IndexLists:
    """Column adjacency (checks in ascending order) of a row adjacency."""
    cols: List[List[int]] = [[] for _ in range(n)]
    for j, row in enumerate(rows):
        for i in row:
            cols[i].append(j)
    return tuple(tuple(c) for c in cols)


class CodePool:
    """Ordered, non-empty collection of codes with unique ids."""

    def __init__(self, codes: Sequence[CodeSpec]) -> None:
        if not codes:
            raise ValueError("code pool must not be empty")
        ids = [c.code_id for c in codes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate code ids in pool: {ids}")
        self._codes: Tuple[CodeSpec, ...] = tuple(codes)

    def __iter__(self):
        return iter(self._codes)

    def __len__(self) -> int:
        return len(self._codes)

    def __getitem__(self, code_id: str) -> CodeSpec:
        for c in self._codes:
            if c.code_id == code_id:
                return c
        raise KeyError(code_id)

    @property
    def codes(self) -> Tuple[CodeSpec, ...]:
        return self._codes

    def by_rate_descending(self) -> List[CodeSpec]:
        """Highest rate first; equal rates keep pool order."""
        return sorted(self._codes, key=lambda c: -c.rate)
