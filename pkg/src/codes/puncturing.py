"""
Untainted puncturing: puncture positions such that no check node is
adjacent to more than one punctured symbol, so every punctured symbol is
recovered by its checks in the first decoder iteration.

The list is generated once per code and cached in a sidecar text file so
both parties read identical positions.
"""

from __future__ import annotations

import logging
import os
import tempfile
from pathlib import Path
from typing import List, Sequence

from src.codes.parity import CodeSpec

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".untainted"
_SIDECAR_MAGIC = "# untainted v1"


def is_untainted(code: CodeSpec, positions: Sequence[int]) -> bool:
    """True iff every check touches at most one of *positions*."""
    chosen = set(positions)
    if len(chosen) != len(positions):
        return False
    return all(sum(1 for i in row if i in chosen) <= 1 for row in code.rows)


def untainted_punctures(code: CodeSpec) -> List[int]:
    """
    Greedy untainted puncture list.

    Repeatedly takes the candidate with the fewest unblocked check
    neighbours (lowest index on ties), then drops every symbol sharing a
    check with it from candidacy. A candidate never touches a blocked
    check, so the order is simply ascending ``(degree, index)``.
    """
    blocked = [False] * code.n
    picked: List[int] = []
    for v in sorted(range(code.n), key=lambda i: (len(code.cols[i]), i)):
        if blocked[v]:
            continue
        picked.append(v)
        for j in code.cols[v]:
            for w in code.rows[j]:
                blocked[w] = True

    assert is_untainted(code, picked), "untainted property violated"
    logger.info("Untainted list for %s: %d positions", code.code_id or "code", len(picked))
    return picked


# ------------------------------------------------------------------
# Sidecar cache
# ------------------------------------------------------------------
def write_sidecar(path: str | Path, code_id: str, positions: Sequence[int]) -> None:
    """Write atomically; concurrent readers see the old file or the new one."""
    dest = Path(path)
    lines = [f"{_SIDECAR_MAGIC} {code_id}"] + [str(int(p)) for p in positions]
    with tempfile.NamedTemporaryFile("w", encoding="ascii", dir=dest.parent, suffix=".tmp", delete=False) as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(fh.name, dest)


def read_sidecar(path: str | Path, code_id: str) -> List[int] | None:
    """
    Positions from a sidecar file, or ``None`` when the header does not
    name *code_id* (stale or foreign cache).
    """
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != f"{_SIDECAR_MAGIC} {code_id}":
        return None
    try:
        return [int(line) for line in lines[1:] if line.strip()]
    except ValueError:
        return None


def sidecar_path(alist_path: str | Path) -> Path:
    return Path(alist_path).with_suffix(SIDECAR_SUFFIX)
