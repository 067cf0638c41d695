"""
Configuration loader for the LDPC reconciliation toolkit.

Centralizes all runtime settings: decoder limits, verification length,
worker counts, transport timeouts and default paths. Values can be
overridden via environment variables so that nothing is hard-coded.

Per-run parameters for the CLI live in a TOML file (``--config``); see
:func:`load_run_config`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]

# ---------------------------------------------------------------------------
# Resolve project root (two levels up from this file → src/utils/config.py)
# ---------------------------------------------------------------------------
_PROJECT_ROOT = Path(__file__).resolve().parents[2]


def _env_flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class Settings:
    """Immutable, thread-safe configuration object."""

    # ── Decoder ───────────────────────────────────────────────────────
    max_iters: int = int(os.getenv("RECONCILE_MAX_ITERS", "60"))
    trace: bool = _env_flag("RECONCILE_TRACE")
    trace_dir: str = os.getenv("RECONCILE_TRACE_DIR", str(_PROJECT_ROOT / "traces"))

    # ── Codes ─────────────────────────────────────────────────────────
    codes_dir: str = os.getenv("RECONCILE_CODES_DIR", str(_PROJECT_ROOT / "codes"))

    # ── Protocol ──────────────────────────────────────────────────────
    hash_bits: int = int(os.getenv("RECONCILE_HASH_BITS", "64"))
    f_start: float = float(os.getenv("RECONCILE_F_START", "1.0"))

    # ── Simulation ────────────────────────────────────────────────────
    max_workers: int = int(os.getenv("RECONCILE_WORKERS", "4"))
    calibration_frames: int = int(os.getenv("RECONCILE_CALIBRATION_FRAMES", "200"))
    fer_target: float = float(os.getenv("RECONCILE_FER_TARGET", "0.1"))

    # ── Transport ─────────────────────────────────────────────────────
    transport_timeout: float = float(os.getenv("RECONCILE_TRANSPORT_TIMEOUT", "30"))
    connect_retries: int = int(os.getenv("RECONCILE_CONNECT_RETRIES", "5"))


# Singleton instance – import this everywhere.
settings = Settings()


def load_run_config(path: str | Path, section: str) -> Dict[str, Any]:
    """
    Read the ``[section]`` table of a TOML run configuration.

    Returns an empty dict when the file has no such table. Keys are
    normalised so that ``frames-per-point`` and ``frames_per_point`` are the
    same setting.

    Raises
    ------
    FileNotFoundError
        If *path* does not exist.
    ValueError
        If the file is not valid TOML or the section is not a table.
    """
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"{p}: invalid TOML ({exc})") from exc

    table = data.get(section, {})
    if not isinstance(table, dict):
        raise ValueError(f"{p}: [{section}] must be a table")
    return {str(k).replace("-", "_"): v for k, v in table.items()}
