"""Dense complex Matrix Market files (``array complex general``).

Entries are written column-major, one ``re im`` pair per line, each part in
``%.17g`` so that a write/read round trip is bit-exact.  Exact zeros print as
``0``.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = ["HEADER", "write_matrix", "read_matrix", "format_matrix", "parse_matrix", "MatrixFileError"]

HEADER = "%%MatrixMarket matrix array complex general"


class MatrixFileError(ValueError):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


def format_matrix(A, comment: str | None = None) -> str:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise MatrixFileError(f"expected a 2-D array, got shape {A.shape}")
    lines = [HEADER]
    if comment:
        lines += ["% " + c for c in comment.splitlines()]
    lines.append(f"{A.shape[0]} {A.shape[1]}")
    for z in A.ravel(order="F"):
        lines.append(f"{_fmt(z.real)} {_fmt(z.imag)}")
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, source: str = "<string>") -> np.ndarray:
    lines = text.splitlines()
    if not lines or lines[0].lower().split() != HEADER.lower().split():
        raise MatrixFileError(f"{source}: not a '{HEADER}' file")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixFileError(f"{source}: missing size line")
    try:
        rows, cols = (int(t) for t in body[0].split())
    except ValueError:
        raise MatrixFileError(f"{source}: bad size line {body[0]!r}") from None
    if rows < 0 or cols < 0:
        raise MatrixFileError(f"{source}: negative dimensions")
    entries = body[1:]
    if len(entries) != rows * cols:
        raise MatrixFileError(f"{source}: expected {rows * cols} entries, found {len(entries)}")
    try:
        vals = np.array([[float(t) for t in ln.split()] for ln in entries], dtype=np.float64)
    except ValueError as exc:
        raise MatrixFileError(f"{source}: {exc}") from None
    if vals.size and vals.shape[1:] != (2,):
        raise MatrixFileError(f"{source}: every entry needs a real and an imaginary part")
    z = (vals[:, 0] + 1j * vals[:, 1]) if vals.size else np.zeros(0, dtype=np.complex128)
    return np.ascontiguousarray(z.reshape((rows, cols), order="F"))


def write_matrix(path, A, comment: str | None = None) -> None:
    # newline="\n" keeps output byte-identical across platforms
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix(A, comment))


def read_matrix(path) -> np.ndarray:
    with open(os.fspath(path), "r", encoding="ascii") as fh:
        return parse_matrix(fh.read(), os.fspath(path))
