"""Byte-stable CSV readers and writers.

Floats are written with ``repr``, the shortest representation that parses
back to the identical double, so parse -> re-emit is byte-identical and any
rerun with the same seeds produces the same file bytes. Matrix files carry a
leading ``# {json}`` metadata line that always includes ``rows`` and
``cols``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def format_value(x) -> str:
    """Canonical text form: ints as digits, floats as shortest round-trip."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def save_matrix_csv(path, values, meta: dict | None = None) -> None:
    """Write a 2-D array with a ``# {json}`` metadata line."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    full_meta = dict(meta or {})
    full_meta["rows"] = int(arr.shape[0])
    full_meta["cols"] = int(arr.shape[1])
    lines = ["# " + json.dumps(full_meta, sort_keys=True)]
    for row in arr:
        lines.append(",".join(repr(float(v)) for v in row))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines) + "\n")


def load_matrix_csv(path) -> tuple[np.ndarray, dict]:
    """Read a file written by :func:`save_matrix_csv`."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing metadata line")
    meta = json.loads(lines[0][2:])
    rows = [
        [float(cell) for cell in line.split(",")]
        for line in lines[1:]
        if line
    ]
    arr = np.array(rows, dtype=np.float64).reshape(meta["rows"], meta["cols"])
    return arr, meta


def save_table_csv(path, columns: list[str], rows) -> None:
    """Write a header row plus data rows of mixed int/float/str cells."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(cell) for cell in row))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines) + "\n")


def load_table_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read back header and raw string cells (callers parse as needed)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty table")
    columns = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line]
    return columns, rows


def reemit_table_csv(path, out_path) -> None:
    """Re-serialize a table file from its parsed form (round-trip check)."""
    columns, rows = load_table_csv(path)
    lines = [",".join(columns)] + [",".join(row) for row in rows]
    Path(out_path).write_text("\n".join(lines) + "\n")
