"""
Loading a directory of alist files into a :class:`CodePool`.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from src.codes.alist import load_alist_file
from src.codes.puncturing import (
    is_untainted,
    read_sidecar,
    sidecar_path,
    untainted_punctures,
    write_sidecar,
)
from src.codes.parity import CodePool, CodeSpec

logger = logging.getLogger(__name__)


def load_code(path: str | Path, *, write_cache: bool = True) -> CodeSpec:
    """
    Load one alist file with its untainted list attached.

    A sidecar ``<stem>.untainted`` is reused when its header names the code
    and its positions satisfy the untainted property; otherwise the list is
    regenerated (and written back when *write_cache* is set).
    """
    alist = Path(path)
    code = load_alist_file(alist)
    cache = sidecar_path(alist)

    if cache.exists():
        cached = read_sidecar(cache, code.code_id)
        if cached is not None and all(0 <= p < code.n for p in cached) and is_untainted(code, cached):
            return code.with_untainted(cached)
        logger.warning("Ignoring stale puncture cache %s", cache)

    positions = untainted_punctures(code)
    if write_cache:
        try:
            write_sidecar(cache, code.code_id, positions)
        except OSError as exc:
            logger.warning("Could not write puncture cache %s: %s", cache, exc)
    return code.with_untainted(positions)


def load_pool(directory: str | Path, *, write_cache: bool = True) -> CodePool:
    """
    Load every ``*.alist`` file under *directory* (sorted by name).

    Raises
    ------
    FileNotFoundError
        If *directory* does not exist or holds no alist files.
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"code directory not found: {root}")
    files = sorted(root.glob("*.alist"))
    if not files:
        raise FileNotFoundError(f"no .alist files in {root}")

    codes: List[CodeSpec] = [load_code(f, write_cache=write_cache) for f in files]
    for c in codes:
        logger.info("Code %s: n=%d m=%d R=%.3f p_max=%d", c.code_id, c.n, c.m, c.rate, c.p_max)
    return CodePool(codes)
