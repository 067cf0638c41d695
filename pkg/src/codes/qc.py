"""
Quasi-cyclic codes built from base (exponent) matrices.

A base entry ``s >= 0`` expands to the ``z x z`` identity cyclically shifted
right by ``s``; ``-1`` expands to the zero block. The four IEEE 802.11n
codes of block length 1944 (``z = 81``) are bundled, so the standard
experiments need no external files.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

from src.codes.parity import CodeSpec
from src.utils.errors import ContractViolation

IEEE_1944_LIFT = 81

_IEEE_1944_BASE: Dict[str, str] = {
    "1/2": """
57 -1 -1 -1 50 -1 11 -1 50 -1 79 -1  1  0 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1
 3 -1 28 -1  0 -1 -1 -1 55  7 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1 -1 -1
30 -1 -1 -1 24 37 -1 -1 56 14 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1 -1
62 53 -1 -1 53 -1 -1  3 35 -1 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1 -1
40 -1 -1 20 66 -1 -1 22 28 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1 -1
 0 -1 -1 -1  8 -1 42 -1 50 -1 -1  8 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1
69 79 79 -1 -1 -1 56 -1 52 -1 -1 -1  0 -1 -1 -1 -1 -1  0  0 -1 -1 -1 -1
65 -1 -1 -1 38 57 -1 -1 72 -1 27 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1 -1
64 -1 -1 -1 14 52 -1 -1 30 -1 -1 32 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1 -1
-1 45 -1 70  0 -1 -1 -1 77  9 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0 -1
 2 56 -1 57 35 -1 -1 -1 -1 -1 12 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0  0
24 -1 61 -1 60 -1 -1 27 51 -1 -1 16  1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1  0
""",
    "2/3": """
61 75  4 63 56 -1 -1 -1 -1 -1 -1  8 -1  2 17 25  1  0 -1 -1 -1 -1 -1 -1
56 74 77 20 -1 -1 -1 64 24  4 67 -1  7 -1 -1 -1 -1  0  0 -1 -1 -1 -1 -1
28 21 68 10  7 14 65 -1 -1 -1 23 -1 -1 -1 75 -1 -1 -1  0  0 -1 -1 -1 -1
48 38 43 78 76 -1 -1 -1 -1  5 36 -1 15 72 -1 -1 -1 -1 -1  0  0 -1 -1 -1
40  2 53 25 -1 52 62 -1 20 -1 -1 44 -1 -1 -1 -1  0 -1 -1 -1  0  0 -1 -1
69 23 64 10 22 -1 21 -1 -1 -1 -1 -1 68 23 29 -1 -1 -1 -1 -1 -1  0  0 -1
12  0 68 20 55 61 -1 40 -1 -1 -1 52 -1 -1 -1 44 -1 -1 -1 -1 -1 -1  0  0
58  8 34 64 78 -1 -1 11 78 24 -1 -1 -1 -1 -1 58  1 -1 -1 -1 -1 -1 -1  0
""",
    "3/4": """
48 29 28 39  9 61 -1 -1 -1 63 45 80 -1 -1 -1 37 32 22  1  0 -1 -1 -1 -1
 4 49 42 48 11 30 -1 -1 -1 49 17 41 37 15 -1 54 -1 -1 -1  0  0 -1 -1 -1
35 76 78 51 37 35 21 -1 17 64 -1 -1 -1 59  7 -1 -1 32 -1 -1  0  0 -1 -1
 9 65 44  9 54 56 73 34 42 -1 -1 -1 35 -1 -1 -1 46 39  0 -1 -1  0  0 -1
 3 62  7 80 68 26 -1 80 55 -1 36 -1 26 -1  9 -1 72 -1 -1 -1 -1 -1  0  0
26 75 33 21 69 59  3 38 -1 -1 -1 35 -1 62 36 26 -1 -1  1 -1 -1 -1 -1  0
""",
    "5/6": """
13 48 80 66  4 74  7 30 76 52 37 60 -1 49 73 31 74 73 23 -1  1  0 -1 -1
69 63 74 56 64 77 57 65  6 16 51 -1 64 -1 68  9 48 62 54 27 -1  0  0 -1
51 15  0 80 24 25 42 54 44 71 71  9 67 35 -1 58 -1 29 -1 53  0 -1  0  0
16 29 36 41 44 56 59 37 50 24 -1 65  4 65 52 -1  4 -1 73 52  1 -1 -1  0
""",
}

IEEE_1944_IDS: Dict[str, str] = {
    "1/2": "ieee1944_r12",
    "2/3": "ieee1944_r23",
    "3/4": "ieee1944_r34",
    "5/6": "ieee1944_r56",
}


def parse_base_matrix(text: str) -> List[List[int]]:
    rows = [[int(t) for t in line.split()] for line in text.strip().splitlines()]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ContractViolation("base matrix rows differ in length")
    return rows


def expand_base_matrix(base: Sequence[Sequence[int]], z: int, code_id: str = "") -> CodeSpec:
    """
    Lift *base* by circulant permutation blocks of size *z*.

    Row ``b*z + k`` of the lifted matrix has a one in column
    ``c*z + (k + s) % z`` for every base entry ``s = base[b][c] >= 0``.
    """
    if z < 1:
        raise ContractViolation(f"lifting size must be positive, got {z}")
    width = len(base[0]) if base else 0
    rows: List[List[int]] = []
    for base_row in base:
        if len(base_row) != width:
            raise ContractViolation("base matrix rows differ in length")
        for k in range(z):
            rows.append(sorted(c * z + (k + s) % z for c, s in enumerate(base_row) if s >= 0))
    return CodeSpec.from_rows(width * z, rows, code_id=code_id)


def ieee_1944(label: str) -> CodeSpec:
    """The IEEE 802.11n n=1944 code of rate *label* (``"1/2"`` .. ``"5/6"``)."""
    try:
        text = _IEEE_1944_BASE[label]
    except KeyError:
        raise ContractViolation(f"no n=1944 code of rate {label!r}; choose from {sorted(_IEEE_1944_BASE)}") from None
    return expand_base_matrix(parse_base_matrix(text), IEEE_1944_LIFT, code_id=IEEE_1944_IDS[label])
