"""Reading a numeric column from delimited text into a Dataset."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError

__all__ = ["Dataset", "ingest", "as_values"]


@dataclass(frozen=True)
class Dataset:
    """Finite observations in file order, with provenance and ingestion warnings."""

    values: np.ndarray
    name: str = "data"
    source_path: str = ""
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise IngestionError("a dataset needs at least one value")
        if not np.all(np.isfinite(v)):
            raise IngestionError("dataset values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_values(cls, values, name: str = "data") -> Dataset:
        return cls(np.asarray(values, dtype=float), name=name)


def as_values(data) -> np.ndarray:
    """Finite float array from a Dataset or any array-like."""
    if isinstance(data, Dataset):
        return data.values
    v = np.asarray(data, dtype=float).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise IngestionError("data must be a non-empty array of finite values")
    return v


def _parse_float(text: str):
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _sniff_delimiter(sample: str) -> str | None:
    lines = [ln for ln in sample.splitlines() if ln.strip()]
    if not lines:
        return None
    try:
        return csv.Sniffer().sniff("\n".join(lines[:20]), delimiters=",;\t| ").delimiter
    except csv.Error:
        return None


def _split(line: str, delimiter: str | None) -> list[str]:
    if delimiter is None:
        return [line.strip()]
    if delimiter == " ":
        return line.split()
    return [cell.strip().strip('"') for cell in next(csv.reader([line], delimiter=delimiter))]


def ingest(path: str, column: str | int | None = None, delimiter: str | None = None,
           name: str | None = None) -> Dataset:
    """Read one numeric column of a delimited text file.

    ``column`` is a header name (case-insensitive), a 0-based index, or None
    for the first column.  A header row is detected when the first
    non-blank row does not parse as numbers in the selected column.  Rows
    whose cell is empty are skipped; rows whose cell is not a finite number
    are counted as malformed.  Both are reported in ``Dataset.warnings``.
    """
    if not os.path.isfile(path):
        raise IngestionError(f"no such file: {path}")
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            text = fh.read()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not numbered:
        raise IngestionError(f"{path}: file is empty")
    delim = delimiter if delimiter is not None else _sniff_delimiter("\n".join(ln for _, ln in numbered))
    first_no, first = numbered[0]
    first_cells = _split(first, delim)

    idx: int | None = None
    has_header = False
    if isinstance(column, str) and not column.strip().lstrip("-").isdigit():
        lowered = [c.strip().lower() for c in first_cells]
        key = column.strip().lower()
        if key not in lowered:
            raise IngestionError(f"{path}:{first_no}: column {column!r} not found in header {first_cells}")
        idx = lowered.index(key)
        has_header = True
    else:
        idx = 0 if column is None else int(column)
        if idx < 0:
            idx += len(first_cells)
        if not 0 <= idx < len(first_cells):
            raise IngestionError(f"{path}:{first_no}: column index {column} out of range")
        has_header = _parse_float(first_cells[idx]) is None
    rows = numbered[1:] if has_header else numbered

    values, empty, malformed = [], [], []
    for line_no, line in rows:
        cells = _split(line, delim)
        if idx >= len(cells) or cells[idx] == "" or cells[idx].upper() in ("NA", "NAN"):
            empty.append(line_no)
            continue
        v = _parse_float(cells[idx])
        if v is None:
            malformed.append(line_no)
            continue
        values.append(v)
    if not values:
        raise IngestionError(f"{path}: no parseable numeric rows in column {column!r} "
                             f"(malformed lines: {malformed[:10]})")
    warnings = []
    if empty:
        warnings.append(f"skipped {len(empty)} empty row(s) at lines {empty[:10]}")
    if malformed:
        warnings.append(f"skipped {len(malformed)} malformed row(s) at lines {malformed[:10]}")
    label = name or (first_cells[idx] if has_header else os.path.basename(path))
    return Dataset(np.array(values), name=str(label), source_path=os.path.abspath(path),
                   warnings=tuple(warnings))
