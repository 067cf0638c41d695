"""Tests for src.decoder.bp."""
import itertools
import math

import numpy as np
import pytest

from src.codes.parity import CodeSpec
from src.decoder.bp import (
    R_SHORTENED,
    DecodeRequest,
    DecodeStatus,
    channel_llr,
    decode,
    llr_init,
)
from src.protocol.layout import FrameLayout
from src.utils.errors import ContractViolation


def request(code, syndrome, layout=None, pattern=None, q_est=0.1, d=2, max_iters=60):
    layout = layout or FrameLayout.initial(code.n)
    pattern = np.zeros(code.n, dtype=np.uint8) if pattern is None else np.asarray(pattern, dtype=np.uint8)
    return DecodeRequest(np.asarray(syndrome, dtype=np.uint8), pattern, layout, q_est, d, max_iters)


def brute_force_leaders(code, syndrome):
    """All minimum-weight patterns with the given syndrome."""
    best, leaders = None, []
    for bits in itertools.product((0, 1), repeat=code.n):
        e = np.array(bits, dtype=np.uint8)
        if not np.array_equal(code.syndrome(e), syndrome):
            continue
        w = int(e.sum())
        if best is None or w < best:
            best, leaders = w, [e]
        elif w == best:
            leaders.append(e)
    return leaders


# ------------------------------------------------------------------
# LLR initialisation
# ------------------------------------------------------------------
def test_channel_llr_values():
    assert channel_llr(0.1) == pytest.approx(math.log(9), abs=1e-12)
    assert channel_llr(0.02) == pytest.approx(3.8918, abs=1e-4)


def test_llr_init_per_position_class():
    layout = FrameLayout.initial(5, shortened=[0, 1], punctured=[4])
    r0 = llr_init(np.array([0, 1, 0, 1, 1], dtype=np.uint8), layout, 0.02)
    assert r0[0] == R_SHORTENED
    assert r0[1] == -R_SHORTENED
    assert r0[2] == pytest.approx(3.8918, abs=1e-4)
    assert r0[3] == pytest.approx(-3.8918, abs=1e-4)
    assert r0[4] == 0.0


def test_llr_init_rejects_bad_q():
    with pytest.raises(ContractViolation):
        llr_init(np.zeros(3, dtype=np.uint8), FrameLayout.initial(3), 0.5)


# ------------------------------------------------------------------
# decode
# ------------------------------------------------------------------
def test_zero_syndrome_converges_at_once(toy_code):
    out = decode(request(toy_code, [0, 0]), toy_code)
    assert out.status is DecodeStatus.CONVERGED
    assert out.iterations == 1
    assert np.array_equal(out.e_dec, [0, 0, 0])
    assert out.least_reliable == ()


def test_single_errors_match_brute_force(small_code):
    for i in range(small_code.n):
        e = np.zeros(small_code.n, dtype=np.uint8)
        e[i] = 1
        syndrome = small_code.syndrome(e)
        leaders = brute_force_leaders(small_code, syndrome)
        assert len(leaders) == 1
        out = decode(request(small_code, syndrome), small_code)
        assert out.converged
        assert np.array_equal(out.e_dec, leaders[0])


def test_converged_output_satisfies_syndrome(moderate_code):
    rng = np.random.default_rng(1)
    e = (rng.random(moderate_code.n) < 0.02).astype(np.uint8)
    syndrome = moderate_code.syndrome(e)
    out = decode(request(moderate_code, syndrome, q_est=0.02, d=10), moderate_code)
    if out.converged:
        assert np.array_equal(moderate_code.syndrome(out.e_dec), syndrome)
    else:
        assert len(out.least_reliable) == 10


def test_stuck_punctured_symbols_are_reported():
    code = CodeSpec.from_rows(3, [[0, 1, 2]])
    layout = FrameLayout.initial(3, punctured=[0, 1])
    out = decode(request(code, [1], layout=layout, d=2), code)
    assert out.status is DecodeStatus.FAILED
    assert out.e_dec is None
    assert out.least_reliable == (0, 1)


def test_all_punctured_fails_with_lowest_indices(toy_code):
    layout = FrameLayout.initial(3, punctured=[0, 1, 2])
    out = decode(request(toy_code, [1, 0], layout=layout, d=2), toy_code)
    assert not out.converged
    assert out.least_reliable == (0, 1)
    assert np.all(out.final_llrs == 0.0)


def test_failed_set_excludes_shortened_and_is_capped(toy_code):
    layout = FrameLayout.initial(3, shortened=[0], punctured=[1, 2])
    out = decode(request(toy_code, [0, 1], layout=layout, d=5), toy_code)
    if not out.converged:
        assert set(out.least_reliable) <= {1, 2}
        assert len(out.least_reliable) == 2


def test_max_iters_caps_iterations():
    code = CodeSpec.from_rows(3, [[0, 1, 2]])
    layout = FrameLayout.initial(3, punctured=[0, 1])
    out = decode(request(code, [1], layout=layout, max_iters=3), code)
    assert out.iterations == 3
    assert not out.converged


def test_shortened_positions_are_not_overturned(moderate_code):
    rng = np.random.default_rng(2)
    e = (rng.random(moderate_code.n) < 0.03).astype(np.uint8)
    shortened = rng.choice(moderate_code.n, 40, replace=False)
    pattern = np.zeros(moderate_code.n, dtype=np.uint8)
    pattern[shortened] = e[shortened]
    layout = FrameLayout.initial(moderate_code.n, shortened=shortened.tolist())
    out = decode(request(moderate_code, moderate_code.syndrome(e), layout, pattern, q_est=0.03, d=8), moderate_code)
    if out.converged:
        assert np.array_equal(out.e_dec[shortened], e[shortened])
    else:
        assert not set(out.least_reliable) & set(shortened.tolist())


def test_decode_is_deterministic(moderate_code):
    rng = np.random.default_rng(4)
    e = (rng.random(moderate_code.n) < 0.08).astype(np.uint8)
    layout = FrameLayout.initial(moderate_code.n, punctured=list(moderate_code.untainted[:20]))
    req = request(moderate_code, moderate_code.syndrome(e), layout, q_est=0.08, d=12)
    a, b = decode(req, moderate_code), decode(req, moderate_code)
    assert a.status == b.status
    assert a.iterations == b.iterations
    assert a.least_reliable == b.least_reliable
    assert np.array_equal(a.final_llrs, b.final_llrs)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"syndrome": [0, 0, 0]},
        {"syndrome": [0, 0], "pattern": [0, 0]},
        {"syndrome": [0, 0], "layout": FrameLayout.initial(4)},
        {"syndrome": [0, 0], "d": 0},
    ],
)
def test_dimension_mismatch_is_rejected(toy_code, kwargs):
    with pytest.raises(ContractViolation):
        decode(request(toy_code, **kwargs), toy_code)


def test_trace_dump_writes_one_csv_per_decode(toy_code, tmp_path, monkeypatch):
    import dataclasses

    import src.decoder.bp as bp
    import src.decoder.trace as trace

    traced = dataclasses.replace(bp.settings, trace=True, trace_dir=str(tmp_path))
    monkeypatch.setattr(bp, "settings", traced)
    monkeypatch.setattr(trace, "settings", traced)

    layout = FrameLayout.initial(3, shortened=[0], punctured=[2])
    decode(request(toy_code, [0, 0], layout=layout), toy_code)

    files = list(tmp_path.glob("decode_*_toy_converged.csv"))
    assert len(files) == 1
    lines = files[0].read_text().splitlines()
    assert lines[0] == "position,r0,r,set"
    assert [line.rsplit(",", 1)[1] for line in lines[1:]] == ["S", "K", "P"]
