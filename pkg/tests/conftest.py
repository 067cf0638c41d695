import os
import sys

import numpy as np
import pytest

# add project root to sys.path so tests can import src.*
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from src.codes.puncturing import untainted_punctures  # noqa: E402
from src.codes.parity import CodePool, CodeSpec  # noqa: E402
from src.codes.qc import ieee_1944  # noqa: E402

STANDARD_RATES = {"1/2": 0.5, "2/3": 2 / 3, "3/4": 0.75, "5/6": 5 / 6}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance experiment")


def pytest_collection_modifyitems(config, items):
    if "slow" in (config.getoption("-m") or ""):
        return
    skip_slow = pytest.mark.skip(reason="long-running; select with -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def graph_incidence(edges, vertices, code_id):
    """Check per vertex, symbol per edge: every symbol sits in exactly two checks."""
    rows = [[k for k, (u, v) in enumerate(edges) if x in (u, v)] for x in range(vertices)]
    return CodeSpec.from_rows(len(edges), rows, code_id=code_id)


def k4_code():
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    return graph_incidence(edges, 4, "k4")


def k33_code():
    edges = [(a, 3 + b) for a in range(3) for b in range(3)]
    return graph_incidence(edges, 6, "k33")


def petersen_code():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return graph_incidence(outer + spokes + inner, 10, "petersen")


def regular_code(n, col_degree, row_degree, seed, code_id):
    """
    Nearly (col_degree, row_degree)-regular code from a random socket
    matching; repeated edges inside a row are merged. Deterministic per seed.
    """
    m = n * col_degree // row_degree
    rng = np.random.default_rng(seed)
    sockets = np.repeat(np.arange(n), col_degree)
    rng.shuffle(sockets)
    rows = [sorted(set(sockets[j * row_degree:(j + 1) * row_degree].tolist())) for j in range(m)]
    code = CodeSpec.from_rows(n, rows, code_id=code_id)
    return code.with_untainted(untainted_punctures(code))


@pytest.fixture
def toy_code():
    return CodeSpec.from_dense([[1, 1, 0], [0, 1, 1]], code_id="toy")


@pytest.fixture(params=["k4", "k33", "petersen"])
def small_code(request):
    return {"k4": k4_code, "k33": k33_code, "petersen": petersen_code}[request.param]()


@pytest.fixture(scope="session")
def moderate_code():
    """Rate-1/2 (3,6)-regular code, n=240."""
    return regular_code(240, 3, 6, seed=11, code_id="reg240")


@pytest.fixture(scope="session")
def high_rate_code():
    """Rate-3/4 (3,12)-regular code, n=480."""
    return regular_code(480, 3, 12, seed=5, code_id="reg480")


@pytest.fixture(scope="session")
def standard_codes():
    """The four IEEE 802.11n n=1944 codes, keyed by rate label, and their pool."""
    codes = {label: ieee_1944(label) for label in STANDARD_RATES}
    codes = {label: c.with_untainted(untainted_punctures(c)) for label, c in codes.items()}
    return CodePool(list(codes.values())), codes
