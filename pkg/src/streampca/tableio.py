"""CSV observation tables and JSON run sidecars.

Dialect: comma-separated, mandatory header row, '.' decimal point.  A first
column named exactly ``timestamp`` holds ISO-8601 text and is kept out of the
numeric matrix.  Floats are written with 17 significant digits, which
round-trips IEEE doubles losslessly, so any file written here can be
re-ingested by any command without drift.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ObservationTable", "read_table", "write_table", "write_labeled_matrix", "write_sidecar"]

TIMESTAMP_COLUMN = "timestamp"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ObservationTable:
    """Time-ordered numeric observations plus optional row timestamps."""

    column_names: list[str]
    data: np.ndarray
    timestamps: list[str] | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"data must be 2-d, got shape {self.data.shape}")
        if self.data.shape[1] != len(self.column_names):
            raise ValueError(
                f"{len(self.column_names)} column names for {self.data.shape[1]} data columns"
            )
        if self.timestamps is not None and len(self.timestamps) != self.data.shape[0]:
            raise ValueError("timestamp count does not match row count")

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]


def read_table(path) -> ObservationTable:
    """Parse a CSV observation table; errors name the offending line."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        has_ts = header[0] == TIMESTAMP_COLUMN
        names = header[1:] if has_ts else header
        if not names:
            raise ValueError(f"{path}: no numeric columns in header")
        timestamps: list[str] | None = [] if has_ts else None
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            raw = row[1:] if has_ts else row
            values = []
            for name, cell in zip(names, raw):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}, line {lineno}: could not parse {cell!r} "
                        f"in column {name!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(
                        f"{path}, line {lineno}: non-finite value {cell!r} in column {name!r}"
                    )
                values.append(v)
            if has_ts:
                timestamps.append(row[0])
            rows.append(values)
    data = np.array(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return ObservationTable(column_names=names, data=data, timestamps=timestamps)


def write_table(path, table: ObservationTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if table.timestamps is not None:
            writer.writerow([TIMESTAMP_COLUMN, *table.column_names])
            for ts, row in zip(table.timestamps, table.data):
                writer.writerow([ts, *(format_float(v) for v in row)])
        else:
            writer.writerow(table.column_names)
            for row in table.data:
                writer.writerow([format_float(v) for v in row])


def write_labeled_matrix(path, matrix, row_labels, col_labels, corner: str = "") -> None:
    """Square matrix CSV with a header row and a leading label column."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([corner, *col_labels])
        for label, row in zip(row_labels, matrix):
            writer.writerow([label, *(format_float(v) for v in row)])


def write_sidecar(path, payload: dict) -> None:
    """JSON run-metadata sidecar; key order is fixed by the caller, so the
    output is byte-stable across identical runs."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
