"""Header-free CSV matrix I/O and atomic JSON/CSV writers.

CSV format: one matrix row per line, comma-separated numeric literals.
Integer and decimal literals are accepted everywhere; `num/den` fraction
literals are accepted when reading in rational mode. Files are written
atomically (temp file in the destination directory, then os.replace) so a
crash never leaves a half-written report.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from fractions import Fraction

import numpy as np


class MatrixFormatError(ValueError):
    """Malformed CSV input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _parse_cell(text: str, line: int):
    text = text.strip()
    if not text:
        raise MatrixFormatError("empty field", line)
    try:
        return float(text)
    except ValueError:
        raise MatrixFormatError(f"not a number: {text!r}", line) from None


def _parse_cell_exact(text: str, line: int) -> Fraction:
    text = text.strip()
    if not text:
        raise MatrixFormatError("empty field", line)
    try:
        return Fraction(text)  # handles ints, num/den, and decimal literals
    except (ValueError, ZeroDivisionError):
        raise MatrixFormatError(f"not an exact number: {text!r}", line) from None


def read_matrix_csv(path: str, exact: bool = False):
    """Read a header-free CSV matrix. Returns a float ndarray, or a list of
    Fraction rows when exact=True. Rejects ragged rows and empty files."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for i, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue  # ignore blank lines
            parse = _parse_cell_exact if exact else _parse_cell
            row = [parse(cell, i) for cell in record]
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MatrixFormatError(f"expected {width} columns, got {len(row)}", i)
            rows.append(row)
    if not rows:
        raise MatrixFormatError("no data rows in file")
    if exact:
        return rows
    return np.asarray(rows, dtype=float)


def _format_cell(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    f = float(v)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _atomic_write(path: str, writer) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix_csv(path: str, matrix) -> None:
    rows = matrix.tolist() if isinstance(matrix, np.ndarray) else matrix

    def emit(fh):
        w = csv.writer(fh)
        for row in rows:
            w.writerow([_format_cell(v) for v in row])

    _atomic_write(path, emit)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _sanitize(obj):
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def write_json(path: str, payload: dict) -> None:
    def emit(fh):
        json.dump(_sanitize(payload), fh, indent=2, default=_json_default, allow_nan=False)
        fh.write("\n")

    _atomic_write(path, emit)


def write_trials_csv(path: str, records) -> None:
    """Trial records as CSV with a header row (n, seed, deviation, sample_gamma, success)."""

    def emit(fh):
        w = csv.writer(fh)
        w.writerow(["n", "seed", "deviation", "sample_gamma", "success"])
        for r in records:
            w.writerow([r.n, r.seed, repr(r.deviation), repr(r.sample_gamma), int(r.success)])

    _atomic_write(path, emit)
