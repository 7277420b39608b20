"""Matrix Market (array/coordinate, real general) and TSV readers/writers."""

from __future__ import annotations

import io
import os
from contextlib import contextmanager

import numpy as np

from .errors import FormatError

MM_BANNER = "%%MatrixMarket"
_FIELDS = ("real", "double", "integer")


@contextmanager
def _open(source, mode="r"):
    if hasattr(source, "read") or hasattr(source, "write"):
        yield source
    else:
        with open(source, mode) as fh:
            yield fh


def detect_format(path) -> str:
    name = os.fspath(path) if not hasattr(path, "read") else ""
    if name.endswith(".mtx") or name.endswith(".mm"):
        return "matrix-market"
    if name.endswith(".tsv") or name.endswith(".txt"):
        return "tsv"
    if name:
        with open(name) as fh:
            first = fh.readline()
        return "matrix-market" if first.startswith(MM_BANNER) else "tsv"
    return "matrix-market"


def read_matrix(source, format: str | None = None) -> np.ndarray:
    """Read a dense matrix from a path or text stream.

    ``format`` is ``"matrix-market"`` or ``"tsv"``; when omitted it is
    inferred from the file extension or the banner line.
    """
    if format is None:
        if hasattr(source, "read"):
            text = source.read()
            fmt = "matrix-market" if text.lstrip().startswith(MM_BANNER) else "tsv"
            return read_matrix(io.StringIO(text), fmt)
        format = detect_format(source)
    with _open(source) as fh:
        lines = fh.read().splitlines()
    if format == "matrix-market":
        return _parse_mm(lines)
    if format == "tsv":
        return _parse_tsv(lines)
    raise ValueError(f"unknown matrix format {format!r}")


def _number(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"cannot parse {tok!r} as a number", lineno) from None


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"cannot parse {tok!r} as an integer", lineno) from None


def _parse_mm(lines):
    if not lines or not lines[0].startswith(MM_BANNER):
        raise FormatError("missing %%MatrixMarket banner", 1)
    head = lines[0].split()
    if len(head) != 5 or head[1].lower() != "matrix":
        raise FormatError(f"bad banner {lines[0]!r}", 1)
    layout, field, symmetry = (h.lower() for h in head[2:])
    if layout not in ("array", "coordinate"):
        raise FormatError(f"unsupported layout {layout!r}", 1)
    if field not in _FIELDS:
        raise FormatError(f"unsupported field {field!r}", 1)
    if symmetry != "general":
        raise FormatError(f"unsupported symmetry {symmetry!r}", 1)

    body = [(i + 1, ln.split()) for i, ln in enumerate(lines) if i > 0]
    body = [(no, toks) for no, toks in body if toks and not toks[0].startswith("%")]
    if not body:
        raise FormatError("missing size line", len(lines))
    size_no, size = body[0]
    entries = body[1:]

    if layout == "array":
        if len(size) != 2:
            raise FormatError("array size line needs 'rows cols'", size_no)
        rows, cols = _int(size[0], size_no), _int(size[1], size_no)
        if rows <= 0 or cols <= 0:
            raise FormatError("dimensions must be positive", size_no)
        vals = []
        for no, toks in entries:
            if len(toks) != 1:
                raise FormatError("array entries need one value per line", no)
            vals.append(_number(toks[0], no))
        if len(vals) != rows * cols:
            last = entries[-1][0] if entries else size_no
            raise FormatError(f"expected {rows * cols} values, found {len(vals)}", last)
        # column-major by definition of the format
        return np.array(vals, dtype=float).reshape((cols, rows)).T.copy()

    if len(size) != 3:
        raise FormatError("coordinate size line needs 'rows cols nnz'", size_no)
    rows, cols, nnz = (_int(t, size_no) for t in size)
    if rows <= 0 or cols <= 0 or nnz < 0:
        raise FormatError("dimensions must be positive", size_no)
    A = np.zeros((rows, cols))
    if len(entries) != nnz:
        last = entries[-1][0] if entries else size_no
        raise FormatError(f"expected {nnz} entries, found {len(entries)}", last)
    for no, toks in entries:
        if len(toks) != 3:
            raise FormatError("coordinate entries need 'row col value'", no)
        i, j = _int(toks[0], no), _int(toks[1], no)
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise FormatError(f"index ({i}, {j}) outside {rows}x{cols}", no)
        A[i - 1, j - 1] = _number(toks[2], no)
    return A


def _parse_tsv(lines):
    rows = []
    width = None
    for no, ln in enumerate(lines, start=1):
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        toks = ln.split("\t") if "\t" in ln else ln.split()
        vals = [_number(t.strip(), no) for t in toks]
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise FormatError(f"row has {len(vals)} columns, expected {width}", no)
        rows.append(vals)
    if not rows:
        raise FormatError("no data rows", len(lines) or 1)
    return np.array(rows, dtype=float)


def write_matrix(A, dest, format: str = "matrix-market", layout: str = "array"):
    """Write ``A`` so that :func:`read_matrix` reproduces it bit for bit."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    rows, cols = A.shape
    out = []
    if format == "matrix-market":
        if layout == "array":
            out.append(f"{MM_BANNER} matrix array real general")
            out.append(f"{rows} {cols}")
            out.extend(repr(float(v)) for v in A.T.ravel())
        elif layout == "coordinate":
            nz = np.argwhere(A != 0)
            out.append(f"{MM_BANNER} matrix coordinate real general")
            out.append(f"{rows} {cols} {len(nz)}")
            out.extend(f"{i + 1} {j + 1} {float(A[i, j])!r}" for i, j in nz)
        else:
            raise ValueError(f"unknown layout {layout!r}")
    elif format == "tsv":
        out.extend("\t".join(repr(float(v)) for v in row) for row in A)
    else:
        raise ValueError(f"unknown matrix format {format!r}")
    with _open(dest, "w") as fh:
        fh.write("\n".join(out) + "\n")
