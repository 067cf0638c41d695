"""
alist reader/writer.

Layout (MacKay's sparse-matrix interchange format)::

    n m
    max_col_degree max_row_degree
    <n column degrees>
    <m row degrees>
    <n lines: 1-based check indices of each column, zero padded>
    <m lines: 1-based symbol indices of each row, zero padded>

Zero padding is accepted anywhere in the index lines and ignored.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence, Tuple

from src.codes.parity import CodeSpec, transpose
from src.utils.errors import AlistParseError

logger = logging.getLogger(__name__)


def _tokenize(text: str) -> List[Tuple[int, List[str]]]:
    """Return ``(line_number, tokens)`` for every non-blank line."""
    lines: List[Tuple[int, List[str]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if tokens:
            lines.append((number, tokens))
    return lines


def _ints(line_no: int, tokens: Sequence[str]) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise AlistParseError(line_no, f"non-integer token ({exc})") from exc


def load_alist(source: bytes | str, code_id: str = "") -> CodeSpec:
    """
    Parse alist text into a :class:`CodeSpec`.

    Parameters
    ----------
    source : bytes | str
        File contents. Bytes are decoded as ASCII.
    code_id : str
        Name attached to the code (usually the file stem).

    Raises
    ------
    AlistParseError
        On malformed counts, out-of-range or duplicate indices, or when the
        column and row sections describe different graphs. The message
        names the offending line.
    """
    if isinstance(source, bytes):
        try:
            text = source.decode("ascii")
        except UnicodeDecodeError as exc:
            raise AlistParseError(0, f"not an ASCII alist file ({exc})") from exc
    else:
        text = source
    lines = _tokenize(text)
    if len(lines) < 4:
        raise AlistParseError(len(lines), "truncated header (need 4 header lines)")

    header = [_ints(no, toks) for no, toks in lines[:4]]
    (l1, _), (l2, _), (l3, _), (l4, _) = lines[:4]
    if len(header[0]) != 2:
        raise AlistParseError(l1, "expected 'n m'")
    n, m = header[0]
    if not 0 < m < n:
        raise AlistParseError(l1, f"need 0 < m < n, got n={n}, m={m}")
    if len(header[1]) != 2:
        raise AlistParseError(l2, "expected 'max_col_degree max_row_degree'")
    max_col, max_row = header[1]
    col_deg, row_deg = header[2], header[3]
    if len(col_deg) != n:
        raise AlistParseError(l3, f"expected {n} column degrees, got {len(col_deg)}")
    if len(row_deg) != m:
        raise AlistParseError(l4, f"expected {m} row degrees, got {len(row_deg)}")
    if max(col_deg) != max_col or min(col_deg) < 0:
        raise AlistParseError(l3, f"column degrees inconsistent with maximum {max_col}")
    if max(row_deg) != max_row or min(row_deg) < 0:
        raise AlistParseError(l4, f"row degrees inconsistent with maximum {max_row}")

    body = lines[4:]
    if len(body) < n + m:
        last = body[-1][0] if body else l4
        raise AlistParseError(last, f"expected {n + m} index lines, found {len(body)}")

    cols = [
        _index_line(no, toks, bound=m, degree=col_deg[i], max_degree=max_col)
        for i, (no, toks) in enumerate(body[:n])
    ]
    rows = [
        _index_line(no, toks, bound=n, degree=row_deg[j], max_degree=max_row)
        for j, (no, toks) in enumerate(body[n:n + m])
    ]
    if len(body) > n + m:
        raise AlistParseError(body[n + m][0], "unexpected trailing data")

    row_tuple = tuple(tuple(r) for r in rows)
    derived = transpose(row_tuple, n)
    for i, col in enumerate(cols):
        if tuple(sorted(col)) != derived[i]:
            raise AlistParseError(
                body[i][0],
                f"column {i + 1} lists checks {sorted(c + 1 for c in col)} but rows "
                f"reference it from {[c + 1 for c in derived[i]]}",
            )

    code = CodeSpec(n=n, m=m, rows=row_tuple, cols=tuple(tuple(c) for c in cols), code_id=code_id)
    logger.debug("Loaded alist %s", code)
    return code


def _index_line(
    line_no: int, tokens: Sequence[str], *, bound: int, degree: int, max_degree: int
) -> List[int]:
    values = _ints(line_no, tokens)
    if len(values) > max_degree:
        raise AlistParseError(line_no, f"{len(values)} entries exceed maximum degree {max_degree}")
    indices = [v for v in values if v != 0]
    if len(indices) != degree:
        raise AlistParseError(line_no, f"expected {degree} indices, got {len(indices)}")
    for v in indices:
        if not 1 <= v <= bound:
            raise AlistParseError(line_no, f"index {v} out of range 1..{bound}")
    if len(set(indices)) != len(indices):
        raise AlistParseError(line_no, "duplicate index")
    return [v - 1 for v in indices]


def load_alist_file(path: str | Path) -> CodeSpec:
    p = Path(path)
    return load_alist(p.read_bytes(), code_id=p.stem)


def dump_alist(code: CodeSpec) -> str:
    """Serialize *code* in the zero-padded alist layout."""
    col_deg = [len(c) for c in code.cols]
    row_deg = [len(r) for r in code.rows]
    max_col, max_row = max(col_deg), max(row_deg)

    def padded(values: Sequence[int], width: int) -> str:
        entries = [str(v + 1) for v in values] + ["0"] * (width - len(values))
        return " ".join(entries)

    out = [
        f"{code.n} {code.m}",
        f"{max_col} {max_row}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    out.extend(padded(c, max_col) for c in code.cols)
    out.extend(padded(r, max_row) for r in code.rows)
    return "\n".join(out) + "\n"


def normalize_whitespace(text: str) -> str:
    """Collapse runs of blanks and drop empty lines (for round-trip checks)."""
    return "\n".join(" ".join(line.split()) for line in text.splitlines() if line.strip())
