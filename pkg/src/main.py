#!/usr/bin/env python3
"""
LDPC key reconciliation toolkit – CLI entry point.

Usage
-----
    python -m src.main sweep --codes ./alist --q 0.01:0.105:0.005 --alpha 1.0 \\
        --protocol symmetric --frames 1000 --seed 7 --out sweep.csv
    python -m src.main sweep --q 0.02,0.06,0.1 --protocol symmetric,blind --alpha 1.0,0.5
    python -m src.main run --role bob --listen :7001 --code ./alist/r34.alist
    python -m src.main run --role alice --connect host:7001 --code ./alist/r34.alist --q 0.02
    python -m src.main punctures ./alist/r34.alist
    python -m src.main sweep --config experiment.toml        # [sweep] table overrides flags

Exit codes: 0 ok, 1 usage / I-O / parse error, 2 partial sweep (some grid
point had no usable code), 3 protocol failure (desync, transport).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, List, NoReturn, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskID, TextColumn
from rich.table import Table

from src.codes.alist import dump_alist, load_alist_file
from src.codes.pool import load_code, load_pool
from src.codes.puncturing import is_untainted, sidecar_path, untainted_punctures, write_sidecar
from src.codes.selection import select_code
from src.codes.parity import CodePool, CodeSpec
from src.protocol.session import PartyState, Role, SessionParams, SessionResult
from src.protocol.stats import Outcome, ProtocolKind, disclosure_count
from src.sim.frames import PARTY_FUNCTIONS, FrameSetup, frame_inputs
from src.sim.sweep import LAYOUTS, SweepStats, run_sweep, write_sweep_csv
from src.transport.endpoint import Endpoint
from src.transport.prng import derive_seed
from src.transport.tcp import connect, listen, parse_endpoint
from src.utils.config import load_run_config, settings
from src.utils.errors import (
    AlistParseError,
    ContractViolation,
    DesyncDetected,
    NoUsableCode,
    TransportError,
)

console = Console()
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_PROTOCOL = 3

# Decoder estimate for noiseless test keys, which have no QBER to reuse.
_DEFAULT_Q_EST = 0.01


class UsageError(Exception):
    """Bad flag values or config entries (exit code 1)."""


# ------------------------------------------------------------------
# CLI argument parser
# ------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    """Exits with code 1 on usage errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=str, default=None, help="TOML file; its table for this subcommand overrides flags.")
    sub.add_argument("-v", "--verbose", action="store_true", help="Enable DEBUG-level logging.")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="reconcile",
        description="LDPC information reconciliation: symmetric blind, standard blind and rate-adaptive.",
    )
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    # ── sweep ────────────────────────────────────────────────────────
    sweep = subs.add_parser("sweep", help="Monte-Carlo QBER sweep over a code pool, written as CSV.")
    sweep.add_argument("--codes", type=str, default=settings.codes_dir, help=f"Directory of .alist files (default: {settings.codes_dir}).")
    sweep.add_argument("--q", type=str, required=True, help="QBER grid: start:end:step (inclusive) or a comma list.")
    sweep.add_argument("--alpha", type=str, default="1.0", help="Disclosure factor(s) α, comma separated (default: 1.0).")
    sweep.add_argument(
        "--protocol", type=str, default="symmetric",
        help="Protocol(s), comma separated: symmetric, blind, rate-adaptive (default: symmetric).",
    )
    sweep.add_argument("--frames", type=int, default=1000, help="Frames per grid point and protocol (default: 1000).")
    sweep.add_argument("--seed", type=int, default=0, help="Master seed (default: 0).")
    sweep.add_argument("--out", type=str, default="sweep.csv", help="CSV output path (default: sweep.csv).")
    sweep.add_argument("--log", type=str, default=None, help="JSON-lines frame log (default: <out>.jsonl).")
    sweep.add_argument("--layout", type=str, default="untainted", choices=LAYOUTS, help="Round-0 layout policy (default: untainted).")
    sweep.add_argument("--f-start", dest="f_start", type=float, default=settings.f_start, help=f"Target efficiency for --layout fstart (default: {settings.f_start}).")
    sweep.add_argument("-w", "--workers", type=int, default=settings.max_workers, help=f"Worker threads (default: {settings.max_workers}).")
    sweep.add_argument(
        "--calibration-frames", dest="calibration_frames", type=int, default=settings.calibration_frames,
        help=f"Blind frames per code in the calibration pre-pass (default: {settings.calibration_frames}).",
    )
    sweep.add_argument(
        "--fer-target", dest="fer_target", type=float, default=settings.fer_target,
        help=f"Blind FER a calibrated code must stay below (default: {settings.fer_target}).",
    )
    _add_common(sweep)

    # ── run ──────────────────────────────────────────────────────────
    run = subs.add_parser("run", help="One party of a two-process session over TCP.")
    run.add_argument("--role", type=str, required=True, choices=["alice", "bob"], help="This process's role.")
    run.add_argument("--listen", type=str, default=None, help="host:port to listen on (bob).")
    run.add_argument("--connect", type=str, default=None, help="host:port to connect to (alice).")
    run.add_argument("--code", type=str, required=True, help="alist file of the code to use.")
    run.add_argument(
        "--protocol", type=str, default="symmetric", choices=[k.value for k in ProtocolKind],
        help="Protocol to run (default: symmetric).",
    )
    run.add_argument("--q-est", dest="q_est", type=float, default=None, help="QBER estimate both parties use (default: --q, or 0.01 when --q is 0).")
    run.add_argument("--q", type=float, default=0.02, help="Channel QBER for generated test keys (default: 0.02).")
    run.add_argument("--alpha", type=float, default=1.0, help="Disclosure factor α (default: 1.0).")
    run.add_argument("--layout", type=str, default="untainted", choices=LAYOUTS, help="Round-0 layout policy (default: untainted).")
    run.add_argument("--f-start", dest="f_start", type=float, default=settings.f_start, help="Target efficiency for --layout fstart.")
    run.add_argument("--sessions", type=int, default=1, help="Consecutive sessions on one connection (default: 1).")
    run.add_argument("--seed", type=int, default=0, help="Shared master seed (default: 0).")
    run.add_argument("--keys", type=str, default=None, help="Key file: one 0/1 string per session; generated test keys otherwise.")
    run.add_argument(
        "--reproducible", action="store_true",
        help="Seed private randomness from the session seed (bit-exact comparison with loopback runs).",
    )
    run.add_argument("--timeout", type=float, default=settings.transport_timeout, help="Receive/accept timeout in seconds.")
    _add_common(run)

    # ── punctures ────────────────────────────────────────────────────
    punct = subs.add_parser("punctures", help="Generate untainted puncture lists (sidecar files).")
    punct.add_argument("alist", type=str, nargs="+", help="alist file(s).")
    punct.add_argument("--out", type=str, default=None, help="Sidecar path (single input only; default: <stem>.untainted).")
    punct.add_argument("--export-alist", dest="export_alist", type=str, default=None, help="Also write the code back in zero-padded alist form.")
    _add_common(punct)

    return parser


# ------------------------------------------------------------------
# Argument helpers
# ------------------------------------------------------------------
def parse_grid(value: Any) -> List[float]:
    """``start:end:step`` (inclusive within 1e-9) or a comma list of values."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    text = str(value).strip()
    try:
        if ":" in text:
            start, end, step = (float(t) for t in text.split(":"))
            if step <= 0 or end < start:
                raise UsageError(f"grid {text!r}: need step > 0 and end >= start")
            count = math.floor((end - start) / step + 1e-9) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from exc


def parse_protocols(value: Any) -> List[ProtocolKind]:
    names = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        return [ProtocolKind(str(n).strip()) for n in names if str(n).strip()]
    except ValueError as exc:
        choices = ", ".join(k.value for k in ProtocolKind)
        raise UsageError(f"unknown protocol in {value!r}; choose from {choices}") from exc


def _apply_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    try:
        overrides = load_run_config(args.config, args.command)
    except (OSError, ValueError) as exc:
        raise UsageError(f"config {args.config}: {exc}") from exc
    unknown = sorted(k for k in overrides if not hasattr(args, k) or k in ("command", "config"))
    if unknown:
        raise UsageError(f"config {args.config}: unknown keys in [{args.command}]: {', '.join(unknown)}")
    for key, value in overrides.items():
        setattr(args, key, value)


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
        force=True,
    )


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "–" if value is None else f"{value:.{digits}f}"


# ------------------------------------------------------------------
# sweep
# ------------------------------------------------------------------
def _print_sweep_table(rows: Sequence[SweepStats]) -> None:
    table = Table(title="Sweep Summary", title_style="bold cyan", show_lines=False)
    for name in ("Protocol", "Code", "q", "α", "Frames", "f", "±", "Rounds", "±", "FER", "Disclosed"):
        table.add_column(name, justify="right" if name not in ("Protocol", "Code") else "left")
    for r in rows:
        if not r.usable:
            table.add_row(r.protocol, "[red]unusable[/red]", _fmt(r.q), _fmt(r.alpha, 2), str(r.frames), *["–"] * 6)
            continue
        fer_color = "green" if (r.fer or 0.0) < settings.fer_target else "yellow"
        table.add_row(
            r.protocol, r.code_id, _fmt(r.q), _fmt(r.alpha, 2), str(r.frames),
            _fmt(r.mean_f), _fmt(r.ci_f), _fmt(r.mean_rounds, 2), _fmt(r.ci_rounds, 2),
            f"[{fer_color}]{_fmt(r.fer, 3)}[/{fer_color}]", _fmt(r.mean_disclosed, 1),
        )
    console.print()
    console.print(table)


def cmd_sweep(args: argparse.Namespace) -> int:
    q_grid = parse_grid(args.q)
    alphas = parse_grid(args.alpha)
    protocols = parse_protocols(args.protocol)
    if not q_grid or not alphas or not protocols:
        raise UsageError("q grid, alpha and protocol lists must not be empty")

    pool = load_pool(args.codes)
    out = Path(args.out)
    log_path = Path(args.log) if args.log else out.with_suffix(".jsonl")
    total = len(q_grid) * len(alphas) * len(protocols) * args.frames

    console.print(
        f"Sweeping [bold]{len(q_grid)}[/bold] QBER value(s) × {len(alphas)} α × "
        f"{', '.join(p.value for p in protocols)} with {len(pool)} code(s), "
        f"{args.frames} frame(s) each, seed {args.seed}.\n"
    )
    start = time.perf_counter()
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    ) as progress:
        task_id: TaskID = progress.add_task("Reconciling …", total=total)
        result = run_sweep(
            pool, q_grid, alphas, protocols, args.frames, args.seed,
            layout=args.layout,
            f_start=args.f_start,
            workers=args.workers,
            log_path=log_path,
            calibration_frames=args.calibration_frames,
            fer_target=args.fer_target,
            progress=lambda k: progress.advance(task_id, k),
        )
    elapsed = time.perf_counter() - start

    write_sweep_csv(result.rows, out)
    _print_sweep_table(result.rows)
    console.print(f"\nResults saved to [bold green]{out}[/bold green], frame log [bold green]{log_path}[/bold green]  | Time: {elapsed:.1f}s")
    if result.partial:
        console.print("[yellow]Some grid points had no usable code; the CSV is partial.[/yellow]")
        return EXIT_PARTIAL
    return EXIT_OK


# ------------------------------------------------------------------
# run
# ------------------------------------------------------------------
def _read_keys(path: str) -> List[np.ndarray]:
    keys: List[np.ndarray] = []
    for number, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if set(text) - {"0", "1"}:
            raise UsageError(f"{path}:{number}: keys must consist of 0 and 1 only")
        keys.append(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))
    return keys


def _print_session(index: int, res: SessionResult) -> None:
    color = {"verified": "green", "aborted": "yellow", "verify_failed": "red"}[res.outcome.value]
    s = res.stats
    reason = f" ({res.abort_reason.value})" if res.abort_reason else ""
    console.print(
        f"Session {index}: [{color}]{res.outcome.value}{reason}[/{color}]  | rounds {s.rounds}"
        f"  | disclosed {s.disclosed}  | f {s.f_final:.4f}  | transcript {res.transcript}"
    )


def _layout_counts(code: CodeSpec, layout: str, q_est: float, f_start: float) -> tuple[int, int]:
    if layout == "fstart":
        _, s, p = select_code(CodePool([code]), q_est, f_start)
        return s, p
    return 0, code.p_max


def cmd_run(args: argparse.Namespace) -> int:
    role = Role.ALICE if args.role == "alice" else Role.BOB
    q_est = args.q_est if args.q_est is not None else (args.q or _DEFAULT_Q_EST)
    code = load_code(args.code)
    s, p = _layout_counts(code, args.layout, q_est, args.f_start)
    params = SessionParams(d=disclosure_count(code.rate, code.n, args.alpha), f_start=args.f_start, alpha=args.alpha)
    setup = FrameSetup(code=code, s=s, p=p, q=args.q, q_est=q_est, alpha=args.alpha, params=params)
    file_keys = _read_keys(args.keys) if args.keys else None
    sessions = len(file_keys) if file_keys is not None else args.sessions
    party = PARTY_FUNCTIONS[ProtocolKind(args.protocol)]

    if role is Role.BOB:
        if not args.listen:
            raise UsageError("bob needs --listen host:port")
        endpoint: Endpoint = listen(*parse_endpoint(args.listen), timeout=args.timeout)
    else:
        if not args.connect:
            raise UsageError("alice needs --connect host:port")
        endpoint = connect(*parse_endpoint(args.connect), timeout=args.timeout)

    console.print(
        f"[bold]{args.role}[/bold] on code {code.code_id} (n={code.n}, m={code.m}), "
        f"s={s}, p={p}, d={params.d}, {sessions} session(s)\n"
    )
    verified = 0
    with endpoint:
        for i in range(sessions):
            fs = derive_seed(args.seed, i)
            if file_keys is not None:
                raw = file_keys[i]
            else:
                inputs = frame_inputs(setup, args.seed, i)
                raw = inputs.alice_raw if role is Role.ALICE else inputs.bob_raw
            private = np.random.default_rng([fs, 1 + int(role)]) if args.reproducible else np.random.default_rng()
            state = PartyState.create(role, raw, code, s, p, q_est, fs, private)
            res = party(state, endpoint, params)
            verified += res.outcome is Outcome.VERIFIED
            _print_session(i, res)
    console.print(f"\n[bold]{verified}/{sessions}[/bold] session(s) verified.")
    return EXIT_OK


# ------------------------------------------------------------------
# punctures
# ------------------------------------------------------------------
def cmd_punctures(args: argparse.Namespace) -> int:
    if args.out and len(args.alist) > 1:
        raise UsageError("--out needs exactly one alist file")
    if args.export_alist and len(args.alist) > 1:
        raise UsageError("--export-alist needs exactly one alist file")

    table = Table(title="Untainted Puncturing", title_style="bold cyan")
    table.add_column("Code", style="bold")
    table.add_column("n", justify="right")
    table.add_column("m", justify="right")
    table.add_column("|U|", justify="right")
    table.add_column("Sidecar")
    for path in args.alist:
        code = load_alist_file(path)
        positions = untainted_punctures(code)
        if not is_untainted(code, positions):
            raise ContractViolation(f"{path}: generated list violates the untainted property")
        dest = Path(args.out) if args.out else sidecar_path(path)
        write_sidecar(dest, code.code_id, positions)
        if args.export_alist:
            Path(args.export_alist).write_text(dump_alist(code), encoding="ascii")
        table.add_row(code.code_id, str(code.n), str(code.m), str(len(positions)), str(dest))
    console.print(table)
    return EXIT_OK


# ------------------------------------------------------------------
# Main
# ------------------------------------------------------------------
_COMMANDS = {"sweep": cmd_sweep, "run": cmd_run, "punctures": cmd_punctures}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    console.print(
        Panel(
            "[bold cyan]LDPC Key Reconciliation[/bold cyan]\n"
            "Symmetric blind  •  standard blind  •  rate-adaptive",
            expand=False,
        )
    )

    try:
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        return EXIT_USAGE
    except (DesyncDetected, TransportError) as exc:
        console.print(f"[red]Protocol failure:[/red] {exc}")
        return EXIT_PROTOCOL
    except NoUsableCode as exc:
        console.print(f"[yellow]No usable code:[/yellow] {exc}")
        return EXIT_PARTIAL
    except (AlistParseError, ContractViolation, FileNotFoundError, OSError, ValueError) as exc:
        console.print(f"[red]Error:[/red] {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
