"""Tests for the command-line front end (src.main)."""
import csv
import socket
import threading

import pytest

from src.codes.alist import dump_alist
from src.main import EXIT_OK, EXIT_PARTIAL, EXIT_PROTOCOL, EXIT_USAGE, UsageError, main, parse_grid, parse_protocols
from src.protocol.stats import ProtocolKind

TOY_ALIST = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"


@pytest.fixture
def code_dir(tmp_path, moderate_code):
    directory = tmp_path / "codes"
    directory.mkdir()
    (directory / "reg240.alist").write_text(dump_alist(moderate_code))
    return directory


def free_port():
    with socket.create_server(("127.0.0.1", 0)) as spare:
        return spare.getsockname()[1]


# ------------------------------------------------------------------
# Argument helpers
# ------------------------------------------------------------------
def test_parse_grid_range_is_inclusive():
    grid = parse_grid("0.01:0.105:0.005")
    assert len(grid) == 20
    assert grid[0] == 0.01
    assert grid[-1] == pytest.approx(0.105)


def test_parse_grid_lists():
    assert parse_grid("0.02, 0.06,0.1") == [0.02, 0.06, 0.1]
    assert parse_grid([0.5, 1]) == [0.5, 1.0]
    assert parse_grid(0.25) == [0.25]


@pytest.mark.parametrize("text", ["0.1:0.05:0.01", "0.01:0.1:0", "a,b"])
def test_parse_grid_rejects(text):
    with pytest.raises(UsageError):
        parse_grid(text)


def test_parse_protocols():
    assert parse_protocols("symmetric,rate-adaptive") == [ProtocolKind.SYMMETRIC, ProtocolKind.RATE_ADAPTIVE]
    with pytest.raises(UsageError):
        parse_protocols("cascade")


# ------------------------------------------------------------------
# Exit codes
# ------------------------------------------------------------------
def test_unknown_flag_exits_with_usage_code():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--q", "0.05", "--bogus"])
    assert info.value.code == EXIT_USAGE


def test_missing_codes_directory(tmp_path, capsys):
    code = main(["sweep", "--codes", str(tmp_path / "missing"), "--q", "0.05", "--out", str(tmp_path / "o.csv")])
    assert code == EXIT_USAGE
    assert "not found" in " ".join(capsys.readouterr().out.split())


def test_malformed_alist_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.alist"
    bad.write_text("3 2\n2 2\n1 2\n2 2\n")
    assert main(["punctures", str(bad)]) == EXIT_USAGE
    assert "line 3:" in " ".join(capsys.readouterr().out.split())


# ------------------------------------------------------------------
# Subcommands
# ------------------------------------------------------------------
def test_punctures_writes_stable_sidecar(tmp_path, capsys):
    alist = tmp_path / "toy.alist"
    alist.write_text(TOY_ALIST)
    assert main(["punctures", str(alist)]) == EXIT_OK
    sidecar = tmp_path / "toy.untainted"
    first = sidecar.read_bytes()
    assert main(["punctures", str(alist)]) == EXIT_OK
    assert sidecar.read_bytes() == first
    assert first.decode().splitlines()[1:] == ["0", "2"]
    assert "toy" in capsys.readouterr().out


def test_punctures_exports_alist(tmp_path):
    alist = tmp_path / "toy.alist"
    alist.write_text(TOY_ALIST)
    out = tmp_path / "copy.alist"
    assert main(["punctures", str(alist), "--export-alist", str(out)]) == EXIT_OK
    assert out.read_text().split() == TOY_ALIST.split()


def test_sweep_writes_csv_and_log(code_dir, tmp_path):
    out = tmp_path / "sweep.csv"
    code = main([
        "sweep", "--codes", str(code_dir), "--q", "0.08,0.1", "--protocol", "symmetric,blind",
        "--frames", "2", "--seed", "3", "--layout", "fstart", "--out", str(out), "-w", "2",
    ])
    assert code == EXIT_OK
    with out.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["q"], r["protocol"]) for r in rows] == [
        ("0.08", "symmetric"), ("0.08", "blind"), ("0.1", "symmetric"), ("0.1", "blind"),
    ]
    assert len((tmp_path / "sweep.jsonl").read_text().splitlines()) == 8


def test_sweep_partial_exit_code(code_dir, tmp_path):
    code = main([
        "sweep", "--codes", str(code_dir), "--q", "0.05", "--frames", "2",
        "--calibration-frames", "2", "--fer-target", "0", "--out", str(tmp_path / "s.csv"),
    ])
    assert code == EXIT_PARTIAL


def test_config_file_overrides_flags(code_dir, tmp_path):
    config = tmp_path / "run.toml"
    config.write_text('[sweep]\nframes = 1\nlayout = "fstart"\nprotocol = ["rate-adaptive"]\n')
    out = tmp_path / "sweep.csv"
    code = main([
        "sweep", "--codes", str(code_dir), "--q", "0.08", "--frames", "50",
        "--out", str(out), "--config", str(config),
    ])
    assert code == EXIT_OK
    with out.open(newline="") as fh:
        (row,) = list(csv.DictReader(fh))
    assert row["frames"] == "1"
    assert row["protocol"] == "rate-adaptive"


def test_config_with_unknown_key(code_dir, tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("[sweep]\nframez = 1\n")
    code = main(["sweep", "--codes", str(code_dir), "--q", "0.08", "--config", str(config)])
    assert code == EXIT_USAGE


def test_run_two_parties_over_tcp(tmp_path, moderate_code):
    alist = tmp_path / "reg240.alist"
    alist.write_text(dump_alist(moderate_code))
    port = free_port()
    common = ["--code", str(alist), "--q", "0.03", "--sessions", "2", "--seed", "9", "--reproducible", "--timeout", "20"]
    results = {}

    def bob():
        results["bob"] = main(["run", "--role", "bob", "--listen", f"127.0.0.1:{port}", *common])

    thread = threading.Thread(target=bob)
    thread.start()
    results["alice"] = main(["run", "--role", "alice", "--connect", f"127.0.0.1:{port}", *common])
    thread.join(timeout=60)
    assert results == {"alice": EXIT_OK, "bob": EXIT_OK}


def test_run_requires_endpoint(tmp_path):
    alist = tmp_path / "toy.alist"
    alist.write_text(TOY_ALIST)
    assert main(["run", "--role", "bob", "--code", str(alist)]) == EXIT_USAGE


def test_run_with_mismatched_alpha_is_a_protocol_failure(tmp_path, moderate_code):
    alist = tmp_path / "reg240.alist"
    alist.write_text(dump_alist(moderate_code))
    port = free_port()
    common = ["--code", str(alist), "--q", "0.03", "--seed", "9", "--timeout", "20"]
    results = {}

    def bob():
        results["bob"] = main(["run", "--role", "bob", "--listen", f"127.0.0.1:{port}", "--alpha", "1.0", *common])

    thread = threading.Thread(target=bob)
    thread.start()
    results["alice"] = main(["run", "--role", "alice", "--connect", f"127.0.0.1:{port}", "--alpha", "0.5", *common])
    thread.join(timeout=60)
    assert results == {"alice": EXIT_PROTOCOL, "bob": EXIT_PROTOCOL}
