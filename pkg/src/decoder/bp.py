"""
Sum-product belief-propagation syndrome decoder.

Decodes a relative syndrome against a supposed error pattern, with
position classes from a :class:`FrameLayout`:

* key positions (K) start at ``±ln((1-q)/q)``,
* shortened positions (S) at ``±100``,
* punctured positions (P) at ``0``.

Decoding stops as soon as the hard decision satisfies the syndrome. It
gives up when the average LLR magnitude over K ∪ P stops growing relative
to the previous ``TREND_WINDOW`` iterations, or at ``max_iters``; the
failed outcome then names the ``d`` least reliable open positions.

The iteration and summation order is fixed so both parties obtain
bit-identical outcomes from identical inputs.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.codes.parity import CodeSpec
from src.decoder.trace import dump_llrs
from src.protocol.layout import FrameLayout
from src.utils.config import settings
from src.utils.errors import ContractViolation

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------
R_SHORTENED = 100.0
TREND_WINDOW = 5
_TANH_LIMIT = 1.0 - 1e-12
_LLR_LIMIT = 1e3


class DecodeStatus(str, Enum):
    CONVERGED = "converged"
    FAILED = "failed"


@dataclass(frozen=True)
class DecodeRequest:
    syndrome: np.ndarray
    pattern: np.ndarray
    layout: FrameLayout
    q_est: float
    d: int
    max_iters: int = settings.max_iters


@dataclass(frozen=True)
class DecodeOutcome:
    """
    Result of one :func:`decode` call.

    ``e_dec`` is set only when converged, ``least_reliable`` (the disclosure
    set D) only when failed.
    """

    status: DecodeStatus
    e_dec: Optional[np.ndarray]
    least_reliable: Tuple[int, ...]
    iterations: int
    final_llrs: np.ndarray

    @property
    def converged(self) -> bool:
        return self.status is DecodeStatus.CONVERGED


def channel_llr(q_est: float) -> float:
    """``ln((1-q)/q)``, the LLR magnitude of a key bit."""
    if not 0.0 < q_est < 0.5:
        raise ContractViolation(f"q_est must lie in (0, 0.5), got {q_est!r}")
    return math.log((1.0 - q_est) / q_est)


def llr_init(pattern: np.ndarray, layout: FrameLayout, q_est: float) -> np.ndarray:
    """Initial LLRs: ``(-1)^e[i]`` times r_k on K, r_s on S, and 0 on P."""
    e = np.asarray(pattern, dtype=np.uint8)
    if e.shape != (layout.n,):
        raise ContractViolation(f"pattern has shape {e.shape}, layout has n={layout.n}")
    sign = 1.0 - 2.0 * e.astype(np.float64)
    magnitude = np.full(layout.n, channel_llr(q_est))
    if layout.shortened:
        magnitude[layout.shortened_positions] = R_SHORTENED
    if layout.punctured:
        magnitude[np.fromiter(layout.punctured, dtype=np.int64)] = 0.0
    # 0.0 * -1 would give -0.0 on punctured ones; keep them exactly +0.
    return np.where(magnitude == 0.0, 0.0, sign * magnitude)


def _validate(req: DecodeRequest, code: CodeSpec) -> None:
    if np.asarray(req.syndrome).shape != (code.m,):
        raise ContractViolation(f"syndrome must have {code.m} bits, got {np.asarray(req.syndrome).shape}")
    if np.asarray(req.pattern).shape != (code.n,):
        raise ContractViolation(f"pattern must have {code.n} bits, got {np.asarray(req.pattern).shape}")
    if req.layout.n != code.n:
        raise ContractViolation(f"layout is for n={req.layout.n}, code has n={code.n}")
    if req.d < 1:
        raise ContractViolation(f"d must be >= 1, got {req.d}")
    if req.max_iters < 1:
        raise ContractViolation(f"max_iters must be >= 1, got {req.max_iters}")


def _exclusive_products(t: np.ndarray) -> np.ndarray:
    """Per row, the product of every other entry (no division, zeros allowed)."""
    prefix = np.ones_like(t)
    suffix = np.ones_like(t)
    if t.shape[1] > 1:
        prefix[:, 1:] = np.cumprod(t[:, :-1], axis=1)
        suffix[:, :-1] = np.cumprod(t[:, :0:-1], axis=1)[:, ::-1]
    return prefix * suffix


def decode(req: DecodeRequest, code: CodeSpec) -> DecodeOutcome:
    """
    Run sum-product decoding of ``req.syndrome`` on *code*.

    Raises
    ------
    ContractViolation
        If any vector in *req* does not match the code dimensions.
    """
    _validate(req, code)
    g = code.graph
    n, E = code.n, g.num_edges
    syndrome = np.asarray(req.syndrome, dtype=np.uint8)
    layout = req.layout

    r0 = llr_init(req.pattern, layout, req.q_est)
    check_sign = (1.0 - 2.0 * syndrome.astype(np.float64))[:, None]
    open_idx = layout.open_positions
    divisor = max(n - len(layout.shortened), 1)

    v2c = r0[g.edge_symbol]
    tanh_buf = np.ones(E + 1)
    c2v = np.zeros(E + 1)
    window: deque[float] = deque(maxlen=TREND_WINDOW)

    r = r0
    for k in range(1, req.max_iters + 1):
        # check nodes
        tanh_buf[:E] = np.tanh(0.5 * v2c)
        extrinsic = np.clip(_exclusive_products(tanh_buf[g.row_edges]), -_TANH_LIMIT, _TANH_LIMIT)
        messages = 2.0 * np.arctanh(extrinsic) * check_sign
        c2v[:E] = messages[g.row_mask]

        # symbol nodes
        r = np.clip(r0 + c2v[g.col_edges].sum(axis=1), -_LLR_LIMIT, _LLR_LIMIT)
        z = (r < 0).astype(np.uint8)

        if np.array_equal(code.syndrome(z), syndrome):
            _check_shortened(z, req, code)
            outcome = DecodeOutcome(DecodeStatus.CONVERGED, z, (), k, r)
            _trace(code, outcome, r0, layout)
            return outcome

        a_k = float(np.abs(r[open_idx]).sum()) / divisor
        stalled = k > TREND_WINDOW and a_k <= sum(window) / TREND_WINDOW
        if stalled or k == req.max_iters:
            order = np.argsort(np.abs(r[open_idx]), kind="stable")
            least = tuple(int(i) for i in open_idx[order[: req.d]])
            outcome = DecodeOutcome(DecodeStatus.FAILED, None, least, k, r)
            logger.debug(
                "Decode of %s failed after %d iterations (%s)",
                code.code_id, k, "trend" if stalled else "cap",
            )
            _trace(code, outcome, r0, layout)
            return outcome

        window.append(a_k)
        v2c = r[g.edge_symbol] - c2v[:E]

    raise AssertionError("unreachable: the loop returns at max_iters")


def _check_shortened(z: np.ndarray, req: DecodeRequest, code: CodeSpec) -> None:
    s = req.layout.shortened_positions
    if s.size and not np.array_equal(z[s], np.asarray(req.pattern, dtype=np.uint8)[s]):
        flipped = int(np.count_nonzero(z[s] != np.asarray(req.pattern)[s]))
        logger.warning(
            "Anomaly: decode of %s overturned %d shortened position(s)", code.code_id, flipped
        )


def _trace(code: CodeSpec, outcome: DecodeOutcome, r0: np.ndarray, layout: FrameLayout) -> None:
    if settings.trace:
        dump_llrs(code.code_id, outcome.status.value, r0, outcome.final_llrs, layout)
