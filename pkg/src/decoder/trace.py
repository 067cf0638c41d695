"""
LLR dumps for offline inspection of decoder runs.

Enabled with ``RECONCILE_TRACE=1``; each decode call writes one CSV with
the columns ``position, r0, r, set``.
"""

from __future__ import annotations

import csv
import itertools
import logging
import threading
from pathlib import Path

import numpy as np

from src.utils.config import settings

logger = logging.getLogger(__name__)

_counter = itertools.count()
_counter_lock = threading.Lock()


def _membership(layout, n: int) -> list[str]:
    labels = ["K"] * n
    for i in layout.punctured:
        labels[i] = "P"
    for i in layout.shortened:
        labels[i] = "S"
    return labels


def dump_llrs(
    code_id: str,
    status: str,
    r0: np.ndarray,
    r: np.ndarray,
    layout,
    directory: str | Path | None = None,
) -> Path:
    """Write one decode's initial and final LLRs; return the file path."""
    out_dir = Path(directory or settings.trace_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with _counter_lock:
        seq = next(_counter)
    path = out_dir / f"decode_{seq:06d}_{code_id or 'code'}_{status.lower()}.csv"

    labels = _membership(layout, r.size)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["position", "r0", "r", "set"])
        for i in range(r.size):
            writer.writerow([i, repr(float(r0[i])), repr(float(r[i])), labels[i]])
    logger.debug("LLR trace written to %s", path)
    return path
