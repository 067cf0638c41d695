"""Tests for src.sim (channel, single frames, sweeps)."""
import csv
import math
import socket
import threading

import numpy as np
import pytest

from src.codes.alist import dump_alist
from src.codes.pool import load_pool
from src.protocol.session import SessionParams
from src.protocol.stats import Outcome, ProtocolKind, disclosure_count, efficiency
from src.protocol.symmetric import symmetric_party
from src.sim.channel import ChannelModel, h_binary, transmit
from src.sim.frames import FrameSetup, frame_inputs, make_parties, simulate_frame
from src.sim.sweep import (
    CSV_COLUMNS,
    aggregate,
    load_frame_log,
    mean_ci,
    run_sweep,
    write_sweep_csv,
)
from src.transport.tcp import connect, listen
from src.utils.errors import ContractViolation

ALL_PROTOCOLS = [ProtocolKind.SYMMETRIC, ProtocolKind.BLIND, ProtocolKind.RATE_ADAPTIVE]


@pytest.fixture
def code_dir(tmp_path, moderate_code):
    directory = tmp_path / "codes"
    directory.mkdir()
    (directory / "reg240.alist").write_text(dump_alist(moderate_code))
    return directory


# ------------------------------------------------------------------
# Channel
# ------------------------------------------------------------------
@pytest.mark.parametrize(
    "q, expected",
    [(0.0, 0.0), (0.5, 1.0), (0.02, 0.14144), (0.11, 0.49992)],
)
def test_h_binary(q, expected):
    assert h_binary(q) == pytest.approx(expected, abs=1e-5)


def test_h_binary_domain():
    with pytest.raises(ValueError):
        h_binary(1.5)


def test_transmit_noiseless_channel():
    x = np.random.default_rng(0).integers(0, 2, 500, dtype=np.uint8)
    tx = transmit(x, ChannelModel(0.0, np.random.default_rng(1)))
    assert np.array_equal(tx.received, x)
    assert not tx.mask.any()


def test_transmit_flips_by_mask():
    x = np.zeros(1000, dtype=np.uint8)
    tx = transmit(x, ChannelModel(0.1, np.random.default_rng(2)))
    assert np.array_equal(tx.received ^ x, tx.mask)


def test_transmit_error_rate():
    x = np.zeros(200_000, dtype=np.uint8)
    tx = transmit(x, ChannelModel(0.25, np.random.default_rng(3)))
    assert tx.mask.mean() == pytest.approx(0.25, abs=0.005)


def test_channel_rejects_bad_q():
    with pytest.raises(ValueError):
        ChannelModel(0.5, np.random.default_rng(0))


# ------------------------------------------------------------------
# Frames
# ------------------------------------------------------------------
def test_frame_inputs_do_not_depend_on_protocol_or_call(moderate_code):
    setup = FrameSetup(moderate_code, 0, 10, 0.05, 0.05, 1.0, SessionParams(d=5))
    a = frame_inputs(setup, 11, 3)
    b = frame_inputs(setup, 11, 3)
    assert np.array_equal(a.alice_raw, b.alice_raw)
    assert np.array_equal(a.bob_raw ^ a.alice_raw, a.mask)
    assert a.alice_raw.size == moderate_code.n - 10


def test_simulate_frame_records_ground_truth(moderate_code):
    setup = FrameSetup(moderate_code, 0, 10, 0.03, 0.03, 1.0, SessionParams(d=5))
    record = simulate_frame(setup, ProtocolKind.SYMMETRIC, 11, 0)
    assert record.outcome is Outcome.VERIFIED
    assert record.stats.residual_errors == 0
    row = record.to_dict()
    assert row["frame"] == 0
    assert row["outcome"] == "verified"
    assert row["protocol"] == "symmetric"


# ------------------------------------------------------------------
# Aggregation
# ------------------------------------------------------------------
def test_mean_ci():
    assert mean_ci([]) == (None, None)
    assert mean_ci([2.0]) == (2.0, 0.0)
    mean, half = mean_ci([1.0, 3.0])
    assert mean == 2.0
    assert half == pytest.approx(1.96 * math.sqrt(2) / math.sqrt(2))


def test_aggregate_splits_verified_and_all_frames():
    rows = [
        {"outcome": "verified", "f_final": 1.1, "rounds": 1, "disclosed": 5},
        {"outcome": "verified", "f_final": 1.3, "rounds": 3, "disclosed": 15},
        {"outcome": "aborted", "f_final": 2.0, "rounds": 9, "disclosed": 45},
    ]
    stats = aggregate("symmetric", "c", 0.05, 1.0, rows)
    assert stats.frames == 3
    assert stats.mean_f == pytest.approx(1.2)
    assert stats.ci_f == pytest.approx(1.96 * math.sqrt(0.02) / math.sqrt(2))
    assert stats.mean_rounds == pytest.approx(2.0)
    assert stats.fer == pytest.approx(1 / 3)
    assert stats.mean_disclosed == pytest.approx(65 / 3)


def test_aggregate_without_verified_frames():
    stats = aggregate("blind", "c", 0.05, 1.0, [{"outcome": "aborted", "f_final": 1.0, "rounds": 0, "disclosed": 0}])
    assert stats.mean_f is None
    assert stats.fer == 1.0
    assert stats.to_row()["mean_f"] == ""


def test_aggregate_rejects_empty():
    with pytest.raises(ContractViolation):
        aggregate("blind", "c", 0.05, 1.0, [])


# ------------------------------------------------------------------
# Sweeps
# ------------------------------------------------------------------
def test_sweep_rows_and_log(code_dir, tmp_path):
    pool = load_pool(code_dir)
    log = tmp_path / "frames.jsonl"
    result = run_sweep(
        pool, [0.08, 0.1], [1.0], ALL_PROTOCOLS, 4, 2024,
        layout="fstart", workers=2, log_path=log,
    )
    assert not result.partial
    assert [(r.q, r.protocol) for r in result.rows] == [
        (q, k.value) for q in (0.08, 0.1) for k in ALL_PROTOCOLS
    ]

    entries = load_frame_log(log)
    assert len(entries) == 2 * 3 * 4
    for entry in entries:
        recomputed = efficiency(
            ProtocolKind(entry["protocol"]), m=entry["m"], n=entry["n"], p0=entry["p0"],
            s0=entry["s0"], rounds=entry["rounds"], d=entry["d"], q_est=entry["q_est"],
        )
        assert recomputed == pytest.approx(entry["f_final"], rel=1e-12)
        if entry["outcome"] == "verified":
            assert entry["residual_errors"] == 0

    for row in result.rows:
        mine = [e for e in entries if e["protocol"] == row.protocol and e["q"] == row.q]
        again = aggregate(row.protocol, row.code_id, row.q, row.alpha, mine)
        assert again == row


def test_protocols_share_channel_realisations(code_dir, tmp_path):
    pool = load_pool(code_dir)
    log = tmp_path / "frames.jsonl"
    run_sweep(pool, [0.08], [1.0], ALL_PROTOCOLS, 3, 5, layout="fstart", workers=1, log_path=log)
    entries = load_frame_log(log)
    by_protocol = {k.value: [e for e in entries if e["protocol"] == k.value] for k in ALL_PROTOCOLS}
    layouts = {tuple((e["frame"], e["s0"], e["p0"], e["d"]) for e in rows) for rows in by_protocol.values()}
    assert len(layouts) == 1


def test_sweep_is_reproducible_across_worker_counts(code_dir, tmp_path):
    pool = load_pool(code_dir)
    outputs = []
    for workers in (1, 3):
        result = run_sweep(pool, [0.08], [1.0, 0.5], ALL_PROTOCOLS, 4, 77, layout="fstart", workers=workers)
        path = tmp_path / f"sweep_{workers}.csv"
        write_sweep_csv(result.rows, path)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]

    with (tmp_path / "sweep_1.csv").open(newline="") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_COLUMNS
        assert len(list(reader)) == 2 * 3


def test_calibrated_sweep(code_dir):
    pool = load_pool(code_dir)
    result = run_sweep(
        pool, [0.05], [1.0], [ProtocolKind.SYMMETRIC], 3, 1,
        layout="untainted", workers=2, calibration_frames=4, fer_target=1.01,
    )
    (row,) = result.rows
    assert row.code_id == "reg240"
    assert row.usable


def test_unusable_grid_point_marks_partial(code_dir):
    pool = load_pool(code_dir)
    result = run_sweep(
        pool, [0.05], [1.0], ALL_PROTOCOLS, 3, 1,
        layout="untainted", workers=2, calibration_frames=2, fer_target=0.0,
    )
    assert result.partial
    assert all(r.code_id == "" and r.fer is None for r in result.rows)


def test_sweep_rejects_bad_grid(code_dir):
    pool = load_pool(code_dir)
    with pytest.raises(ContractViolation):
        run_sweep(pool, [0.0], [1.0], ALL_PROTOCOLS, 3, 1, layout="fstart")
    with pytest.raises(ContractViolation):
        run_sweep(pool, [0.05], [1.0], ALL_PROTOCOLS, 0, 1, layout="fstart")


# ------------------------------------------------------------------
# Sockets against loopback
# ------------------------------------------------------------------
def test_socket_sessions_match_loopback_frames(moderate_code):
    params = SessionParams(d=disclosure_count(moderate_code.rate, moderate_code.n, 1.0))
    setup = FrameSetup(moderate_code, 0, moderate_code.p_max, 0.06, 0.06, 1.0, params)
    frames, seed = 12, 5
    with socket.create_server(("127.0.0.1", 0)) as spare:
        port = spare.getsockname()[1]
    results = {}

    def run_side(index_of_party, endpoint):
        with endpoint:
            return [
                symmetric_party(make_parties(setup, frame_inputs(setup, seed, i))[index_of_party], endpoint, params)
                for i in range(frames)
            ]

    def bob():
        results["bob"] = run_side(1, listen("127.0.0.1", port, timeout=20))

    thread = threading.Thread(target=bob)
    thread.start()
    results["alice"] = run_side(0, connect("127.0.0.1", port, timeout=20))
    thread.join(timeout=60)

    expected = [simulate_frame(setup, ProtocolKind.SYMMETRIC, seed, i) for i in range(frames)]
    for side in ("alice", "bob"):
        assert [r.transcript for r in results[side]] == [e.transcript for e in expected]
        assert [r.stats.rounds for r in results[side]] == [e.stats.rounds for e in expected]
    assert [r.outcome for r in results["bob"]] == [e.outcome for e in expected]
    assert [r.stats.f_final for r in results["bob"]] == [e.stats.f_final for e in expected]
