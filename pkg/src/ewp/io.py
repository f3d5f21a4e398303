"""CSV and JSON file formats.

Numeric CSVs are comma separated, UTF-8, with an optional single header row
(detected when any field of the first row does not parse as a number).
Floats are written with 17 significant digits so a write/read round trip is
exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


class CSVFormatError(ValueError):
    def __init__(self, path, line: int, column: int | None, message: str):
        self.path, self.line, self.column = str(path), line, column
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{path}: {where}: {message}")


def _parse_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _is_numeric_row(row: list[str]) -> bool:
    try:
        for cell in row:
            float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path) -> tuple[np.ndarray, list[str] | None]:
    """Read a rectangular numeric CSV; returns ``(matrix, header or None)``."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError) as exc:
        raise CSVFormatError(path, 0, None, f"cannot read file: {exc}") from exc
    if not rows:
        raise CSVFormatError(path, 1, None, "no data rows")

    header = None
    if not _is_numeric_row(rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise CSVFormatError(path, 2, None, "header but no data rows")

    width = len(header) if header is not None else len(rows[0][1])
    out = np.empty((len(rows), width))
    for r, (line, row) in enumerate(rows):
        if len(row) != width:
            raise CSVFormatError(path, line, None, f"expected {width} fields, found {len(row)}")
        for c, cell in enumerate(row):
            try:
                out[r, c] = _parse_float(cell.strip())
            except ValueError:
                raise CSVFormatError(path, line, c + 1, f"not a finite number: {cell!r}") from None
    return out, header


def write_matrix(path, M, header: list[str] | None = None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in M:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")


def read_labels(path) -> np.ndarray:
    M, _ = read_matrix(path)
    if M.shape[1] != 1:
        raise CSVFormatError(path, 1, None, f"labels file must have one column, found {M.shape[1]}")
    labels = M[:, 0]
    if not np.array_equal(labels, np.round(labels)):
        raise CSVFormatError(path, 1, None, "labels must be integers")
    return labels.astype(np.int64)


def write_labels(path, labels) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("label\n")
        for v in np.asarray(labels, dtype=np.int64):
            fh.write(f"{v}\n")


def write_weights(path, w) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("feature,weight\n")
        for l, v in enumerate(np.asarray(w, dtype=np.float64)):
            fh.write(f"{l},{FLOAT_FMT % v}\n")


def read_weights(path) -> np.ndarray:
    M, _ = read_matrix(path)
    return M[np.argsort(M[:, 0]), 1]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, payload) -> None:
    # json emits floats via repr(), which round-trips exactly
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
