"""
Monte-Carlo QBER sweeps.

For each grid point ``(q, α)`` the sweep picks a code and frame layout,
runs ``frames`` independent sessions per protocol on a worker pool, writes
every frame to a JSON-lines log, and folds the log rows into one
:class:`SweepStats` row.

Layout policies
---------------
``untainted``
    s0 = 0, p0 = |untainted list|; the code is the highest-rate one whose
    standard-blind FER in a calibration pre-pass stays below the target.
``fstart``
    code, s and p from :func:`select_code` at the requested ``f_start``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from src.codes.selection import select_code
from src.codes.parity import CodePool, CodeSpec
from src.protocol.session import SessionParams
from src.protocol.stats import Outcome, ProtocolKind, disclosure_count
from src.sim.frames import FrameRecord, FrameSetup, simulate_frame
from src.transport.prng import derive_seed
from src.utils.config import settings
from src.utils.errors import ContractViolation, NoUsableCode

logger = logging.getLogger(__name__)

LAYOUTS = ("untainted", "fstart")

CSV_COLUMNS = [
    "protocol",
    "code_id",
    "q",
    "alpha",
    "frames",
    "mean_f",
    "ci_f",
    "mean_rounds",
    "ci_rounds",
    "fer",
    "mean_disclosed",
]

_Z95 = 1.96
_CALIBRATION_STREAM = 0xCA11B4A7E

ProgressFn = Callable[[int], None]


@dataclass(frozen=True)
class SweepStats:
    """Aggregated statistics of one (protocol, code, q, α) grid point."""

    protocol: str
    code_id: str
    q: float
    alpha: float
    frames: int
    mean_f: Optional[float] = None
    ci_f: Optional[float] = None
    mean_rounds: Optional[float] = None
    ci_rounds: Optional[float] = None
    fer: Optional[float] = None
    mean_disclosed: Optional[float] = None

    @property
    def usable(self) -> bool:
        return bool(self.code_id)

    def to_row(self) -> Dict[str, Any]:
        return {k: ("" if v is None else v) for k, v in asdict(self).items()}


@dataclass
class SweepResult:
    rows: List[SweepStats] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        """True if any grid point had no usable code."""
        return any(not r.usable for r in self.rows)


# ------------------------------------------------------------------
# Aggregation (pure)
# ------------------------------------------------------------------
def mean_ci(values: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """Sample mean and 95 % normal-approximation half-width."""
    k = len(values)
    if k == 0:
        return None, None
    mean = math.fsum(values) / k
    if k < 2:
        return mean, 0.0
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (k - 1))
    return mean, _Z95 * sd / math.sqrt(k)


def aggregate(
    protocol: str, code_id: str, q: float, alpha: float, records: Sequence[Dict[str, Any]]
) -> SweepStats:
    """
    Fold per-frame log rows into one stats row.

    Efficiency and rounds average over verified frames; FER (aborted plus
    verification failures) and disclosed bits over all frames.
    """
    if not records:
        raise ContractViolation("cannot aggregate zero frames")
    verified = [r for r in records if r["outcome"] == Outcome.VERIFIED.value]
    mean_f, ci_f = mean_ci([float(r["f_final"]) for r in verified])
    mean_rounds, ci_rounds = mean_ci([float(r["rounds"]) for r in verified])
    return SweepStats(
        protocol=protocol,
        code_id=code_id,
        q=q,
        alpha=alpha,
        frames=len(records),
        mean_f=mean_f,
        ci_f=ci_f,
        mean_rounds=mean_rounds,
        ci_rounds=ci_rounds,
        fer=(len(records) - len(verified)) / len(records),
        mean_disclosed=math.fsum(float(r["disclosed"]) for r in records) / len(records),
    )


def load_frame_log(path: str | Path) -> List[Dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ------------------------------------------------------------------
# Frame execution
# ------------------------------------------------------------------
def run_frames(
    setup: FrameSetup,
    kind: ProtocolKind,
    seed: int,
    frames: int,
    workers: int = settings.max_workers,
    progress: Optional[ProgressFn] = None,
) -> List[FrameRecord]:
    """Simulate frames ``0..frames-1``; results are sorted by frame index."""
    records: List[FrameRecord] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(simulate_frame, setup, kind, seed, i) for i in range(frames)]
        for future in as_completed(futures):
            records.append(future.result())
            if progress is not None:
                progress(1)
    records.sort(key=lambda r: r.index)
    return records


def _setup(code: CodeSpec, s: int, p: int, q: float, alpha: float, f_start: float) -> FrameSetup:
    d = disclosure_count(code.rate, code.n, alpha)
    params = SessionParams(d=d, f_start=f_start, alpha=alpha)
    return FrameSetup(code=code, s=s, p=p, q=q, q_est=q, alpha=alpha, params=params)


def calibrate(
    pool: CodePool,
    q: float,
    alpha: float,
    seed: int,
    frames: int = settings.calibration_frames,
    fer_target: float = settings.fer_target,
    workers: int = settings.max_workers,
) -> CodeSpec:
    """
    Highest-rate code whose standard-blind FER at *q* is below *fer_target*.

    Raises ``NoUsableCode`` if no code qualifies.
    """
    cal_seed = derive_seed(seed, _CALIBRATION_STREAM)
    for code in pool.by_rate_descending():
        if code.p_max >= code.m:
            continue
        setup = _setup(code, 0, code.p_max, q, alpha, 1.0)
        records = run_frames(setup, ProtocolKind.BLIND, cal_seed, frames, workers)
        fer = sum(r.outcome is not Outcome.VERIFIED for r in records) / len(records)
        logger.info("Calibration q=%.4f: code %s blind FER %.3f", q, code.code_id, fer)
        if fer < fer_target:
            return code
    raise NoUsableCode(f"no code reaches blind FER < {fer_target} at q={q}")


def plan_grid_point(
    pool: CodePool,
    q: float,
    alpha: float,
    seed: int,
    layout: str = "untainted",
    f_start: float = settings.f_start,
    calibration_frames: int = settings.calibration_frames,
    fer_target: float = settings.fer_target,
    workers: int = settings.max_workers,
) -> FrameSetup:
    if layout == "fstart":
        code, s, p = select_code(pool, q, f_start)
        return _setup(code, s, p, q, alpha, f_start)
    if layout == "untainted":
        code = calibrate(pool, q, alpha, seed, calibration_frames, fer_target, workers)
        return _setup(code, 0, code.p_max, q, alpha, f_start)
    raise ContractViolation(f"unknown layout policy {layout!r}; expected one of {LAYOUTS}")


# ------------------------------------------------------------------
# Sweep
# ------------------------------------------------------------------
def run_sweep(
    pool: CodePool,
    q_grid: Sequence[float],
    alphas: Sequence[float],
    protocols: Sequence[ProtocolKind],
    frames: int,
    seed: int,
    *,
    layout: str = "untainted",
    f_start: float = settings.f_start,
    workers: int = settings.max_workers,
    log_path: str | Path | None = None,
    calibration_frames: int = settings.calibration_frames,
    fer_target: float = settings.fer_target,
    progress: Optional[ProgressFn] = None,
) -> SweepResult:
    """
    Run every ``(q, α, protocol)`` combination and aggregate.

    All protocols of a grid point use the same code, layout counts and
    frame seeds, so they reconcile identical channel realisations. Grid
    points without a usable code yield a row with an empty ``code_id``.
    """
    if frames < 1:
        raise ContractViolation(f"frames must be >= 1, got {frames}")
    bad = [q for q in q_grid if not 0.0 < q < 0.5]
    if bad:
        raise ContractViolation(f"QBER grid values must lie in (0, 0.5): {bad}")

    result = SweepResult()
    log_fh: Optional[IO[str]] = Path(log_path).open("w", encoding="utf-8") if log_path else None
    try:
        for q in q_grid:
            for alpha in alphas:
                try:
                    setup = plan_grid_point(
                        pool, q, alpha, seed, layout, f_start, calibration_frames, fer_target, workers
                    )
                except NoUsableCode as exc:
                    logger.warning("q=%.4f alpha=%.3f unusable: %s", q, alpha, exc)
                    for kind in protocols:
                        result.rows.append(SweepStats(kind.value, "", q, alpha, frames))
                    if progress is not None:
                        progress(frames * len(protocols))
                    continue

                logger.info(
                    "q=%.4f alpha=%.3f: code %s, s=%d, p=%d, d=%d",
                    q, alpha, setup.code.code_id, setup.s, setup.p, setup.params.d,
                )
                for kind in protocols:
                    rows = [r.to_dict() for r in run_frames(setup, kind, seed, frames, workers, progress)]
                    if log_fh is not None:
                        _write_log(log_fh, rows)
                    result.rows.append(aggregate(kind.value, setup.code.code_id, q, alpha, rows))
    finally:
        if log_fh is not None:
            log_fh.close()
    return result


def _write_log(fh: IO[str], rows: Iterable[Dict[str, Any]]) -> None:
    for row in rows:
        fh.write(json.dumps(row, sort_keys=True) + "\n")
    fh.flush()


def write_sweep_csv(rows: Sequence[SweepStats], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_row())
