"""CSV / JSON emission with shortest round-trip float formatting."""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Iterable, Sequence

import numpy as np

from .errors import SptruncError

__all__ = [
    "OutputError",
    "fmt",
    "rows_to_csv",
    "eigenvalues_to_csv",
    "read_eigenvalue_csv",
    "read_csv_columns",
    "write_text",
    "to_json",
]


class OutputError(SptruncError, OSError):
    """A result file could not be written."""


def fmt(x) -> str:
    """Shortest decimal that parses back to the same double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def eigenvalues_to_csv(eigs: np.ndarray, start: int = 0) -> str:
    """``sample,re,im`` rows for an ``(S, N)`` array of pair representatives."""
    eigs = np.atleast_2d(eigs)
    rows = ((start + s, lam.real, lam.imag) for s, row in enumerate(eigs) for lam in row)
    return rows_to_csv(["sample", "re", "im"], rows)


def read_csv_columns(text_or_path: str) -> dict[str, np.ndarray]:
    """Parse a numeric CSV into ``{column: float array}``."""
    text = text_or_path
    if "\n" not in text_or_path and os.path.exists(text_or_path):
        with open(text_or_path, newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cols = list(zip(*reader)) or [()] * len(header)
    return {h: np.array([float(v) for v in c]) for h, c in zip(header, cols)}


def read_eigenvalue_csv(text_or_path: str):
    """Inverse of :func:`eigenvalues_to_csv`: ``(sample_index, eigenvalue)`` arrays."""
    cols = read_csv_columns(text_or_path)
    return cols["sample"].astype(np.int64), cols["re"] + 1j * cols["im"]


def write_text(path: str | None, text: str, stream=None) -> None:
    """Write ``text`` to ``path``; with no path, write to ``stream`` (stdout by default)."""
    if path is None or path == "-":
        import sys

        (stream or sys.stdout).write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)
