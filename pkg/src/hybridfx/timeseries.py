"""Core series containers, CSV ingestion and increment computation.

All series are index-based. Timestamps, when present in the first column of
an input file, are carried as opaque labels and never parsed. Every container
is immutable after construction (backing arrays are marked read-only), so
instances are safe to share across threads.

Numeric output is serialized with 17 significant digits, which round-trips
IEEE doubles exactly: a written file reloads to bit-identical values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ReturnSeries",
    "VolTermPath",
    "IncrementSeries",
    "load_returns_csv",
    "save_returns_csv",
    "load_vols_csv",
    "save_vols_csv",
    "prices_to_returns",
    "increments",
]


def fmt(x: float) -> str:
    """Render a double with 17 significant digits (lossless round-trip)."""
    return format(float(x), ".17g")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """A one-dimensional series of per-period returns (dimensionless)."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("return series must be one-dimensional")
        if v.size < 2:
            raise ValueError("return series needs at least 2 values")
        if not np.all(np.isfinite(v)):
            raise ValueError("return series contains non-finite values")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class VolTermPath:
    """A T x m history of implied volatilities, one column per option term.

    Volatilities are annualized fractions (0.12 means a 12-vol quote). Percent
    quotes should be rescaled at load time, see ``load_vols_csv(scale=...)``.
    """

    values: np.ndarray
    term_labels: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("vol path must be a T x m matrix")
        rows, terms = v.shape
        if terms < 1:
            raise ValueError("vol path needs at least one term column")
        if rows < 2:
            raise ValueError("vol path needs at least 2 rows")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("volatilities must be finite and strictly positive")
        labels = tuple(self.term_labels) or tuple(f"term{j + 1}" for j in range(terms))
        if len(labels) != terms:
            raise ValueError(f"expected {terms} term labels, got {len(labels)}")
        object.__setattr__(self, "values", _readonly(v))
        object.__setattr__(self, "term_labels", labels)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_terms(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Per-step differences of a multi-term path, one row per step."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("increments must form a non-empty 2-d matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("increments contain non-finite values")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_terms(self) -> int:
        return int(self.values.shape[1])


def increments(path: VolTermPath) -> IncrementSeries:
    """Differences between consecutive rows: result row k is path row k+1 minus row k."""
    return IncrementSeries(np.diff(path.values, axis=0))


def prices_to_returns(prices, label: str = "") -> ReturnSeries:
    """Convert a positive price series to log returns.

    value_k = ln(price_k / price_{k-1}); the result is one element shorter
    than the input, so at least 3 prices are required.
    """
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1:
        raise ValueError("prices must be one-dimensional")
    if p.size < 3:
        raise ValueError("need at least 3 prices (returns would be shorter than 2)")
    bad = np.flatnonzero(~(p > 0.0))
    if bad.size:
        raise ValueError(f"nonpositive price at position {bad[0] + 1}")
    return ReturnSeries(np.log(p[1:] / p[:-1]), label=label)


# ---------------------------------------------------------------------------
# CSV ingestion
#
# Dialect: comma-separated, '.' decimal, UTF-8. A single optional header row
# is detected by a non-numeric final cell. An optional leading date/label
# column is detected by a non-numeric first cell in the first data row.
# ---------------------------------------------------------------------------

def _cell_float(cell: str) -> float | None:
    """Parse a finite float, else None (inf/nan count as unparseable data)."""
    try:
        x = float(cell)
    except ValueError:
        return None
    return x if math.isfinite(x) else None


def _read_rows(path) -> list[tuple[int, list[str]]]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    out = []
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            out.append((reader.line_num, cells))
    return out


def _split_header(rows):
    """Pop the header row if the first row's last cell is not numeric."""
    if rows and _cell_float(rows[0][1][-1]) is None:
        return rows[0][1], rows[1:]
    return None, rows


def load_returns_csv(path, column: int | str | None = None) -> ReturnSeries:
    """Load a single-column return series from a CSV file.

    Accepted layouts: one numeric column; a date/label column followed by one
    numeric column; or a wider file when ``column`` selects the value column
    by 0-based index or header name. A header row is auto-detected. Files
    written by the ``simulate`` command auto-select their ``x`` column.
    """
    header, rows = _split_header(_read_rows(path))
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than 2 rows")

    first = rows[0][1]
    lowered = [h.lower() for h in header] if header else []
    if isinstance(column, str):
        if not header or column.lower() not in lowered:
            raise ValueError(f"{path}: no column named {column!r} in header")
        idx = lowered.index(column.lower())
    elif isinstance(column, int):
        idx = column
    elif header and "x" in lowered:
        idx = lowered.index("x")
    elif len(first) == 1:
        idx = 0
    elif len(first) == 2 and _cell_float(first[0]) is None:
        idx = 1  # leading date/label column
    else:
        raise ValueError(
            f"{path}: expected one numeric column (optionally after a date "
            f"column); pass column=... to select one of {len(first)}"
        )

    values = []
    for line_num, cells in rows:
        if idx >= len(cells):
            raise ValueError(f"{path}: line {line_num} has only {len(cells)} columns")
        x = _cell_float(cells[idx])
        if x is None:
            raise ValueError(f"{path}: non-numeric value {cells[idx]!r} at line {line_num}")
        values.append(x)
    return ReturnSeries(np.asarray(values), label=Path(path).stem)


def save_returns_csv(series: ReturnSeries, path) -> None:
    """Write a return series as a one-column CSV with header ``x``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("x\n")
        for v in series.values:
            fh.write(fmt(v) + "\n")


def load_vols_csv(path, scale: float = 1.0) -> VolTermPath:
    """Load an implied-volatility term-structure history from CSV.

    Each row holds the m term quotes for one date, newest rows last. Term
    labels come from the header when present, otherwise ``term1..termm``.
    ``scale`` multiplies every quote (use 0.01 for percent-quoted data).
    """
    if not scale > 0.0:
        raise ValueError("scale must be positive")
    header, rows = _split_header(_read_rows(path))
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than 2 rows")

    first = rows[0][1]
    skip = 1 if _cell_float(first[0]) is None else 0
    m = len(first) - skip
    if m < 1:
        raise ValueError(f"{path}: no numeric columns found")

    data = np.empty((len(rows), m))
    for r, (line_num, cells) in enumerate(rows):
        if len(cells) - skip != m:
            raise ValueError(
                f"{path}: ragged row at line {line_num} "
                f"({len(cells) - skip} columns, expected {m})"
            )
        for j in range(m):
            x = _cell_float(cells[skip + j])
            if x is None:
                raise ValueError(
                    f"{path}: non-numeric value {cells[skip + j]!r} at line {line_num}"
                )
            if x <= 0.0:
                raise ValueError(f"{path}: nonpositive volatility at line {line_num}")
            data[r, j] = x * scale

    labels = tuple(header[skip:]) if header else ()
    return VolTermPath(data, term_labels=labels)


def save_vols_csv(path_obj: VolTermPath, path) -> None:
    """Write a vol term-structure path as CSV with its term labels as header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(path_obj.term_labels) + "\n")
        for row in path_obj.values:
            fh.write(",".join(fmt(v) for v in row) + "\n")
