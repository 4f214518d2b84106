"""Per-cell KPI time series: representation, CSV I/O, alignment, standardization.

CSV layout::

    timestamp,dl_prb,ul_prb,...
    #category,PM,PM,...        (optional, defaults to PM)
    #unit,percent,percent,...  (optional)
    474864,12.5,3.25,...

Timestamps are integer epoch-hours.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    DegenerateColumnError,
    ExportError,
    OrderError,
    ParseError,
    ShapeError,
    UnknownKpiError,
)

__all__ = [
    "Category",
    "KpiColumn",
    "KpiFrame",
    "StandardizationRecord",
    "load_csv",
    "save_csv",
    "align",
    "standardize",
]

# Relative floor below which a column's standard deviation counts as zero.
_ZERO_STD_RTOL = 1e-12


class Category(str, Enum):
    CM = "CM"
    PM = "PM"
    IM = "IM"


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class KpiColumn:
    name: str
    values: np.ndarray
    category: Category = Category.PM
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, np.float64))
        object.__setattr__(self, "category", Category(self.category))
        if self.values.ndim != 1:
            raise ShapeError(f"column {self.name!r} must be one-dimensional")


@dataclass(frozen=True)
class KpiFrame:
    """Timestamp-indexed KPI columns for one cell.

    Immutable; the arrays it holds are read-only.
    """

    cell_id: str
    timestamps: np.ndarray
    columns: tuple[KpiColumn, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ts = _frozen(self.timestamps, np.int64)
        if ts.ndim != 1:
            raise ShapeError("timestamps must be one-dimensional")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "columns", tuple(self.columns))

        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate KPI names in frame {self.cell_id!r}: {dupes}")
        for col in self.columns:
            if len(col.values) != len(ts):
                raise ShapeError(
                    f"column {col.name!r} has {len(col.values)} values, "
                    f"expected {len(ts)}"
                )

        steps = np.diff(ts)
        if np.any(steps <= 0):
            i = int(np.argmax(steps <= 0)) + 1
            raise OrderError(
                f"timestamps not strictly increasing at position {i} "
                f"({ts[i - 1]} -> {ts[i]})"
            )
        if any(c.category is Category.PM for c in self.columns) and np.any(steps != 1):
            i = int(np.argmax(steps != 1)) + 1
            raise OrderError(
                f"PM series must have a 1-hour step; gap at position {i} "
                f"({ts[i - 1]} -> {ts[i]})"
            )

    @classmethod
    def from_arrays(
        cls,
        cell_id: str,
        timestamps: Sequence[int],
        data: dict[str, Sequence[float]],
        categories: dict[str, str] | None = None,
        units: dict[str, str] | None = None,
    ) -> "KpiFrame":
        categories = categories or {}
        units = units or {}
        cols = tuple(
            KpiColumn(name, vals, categories.get(name, Category.PM), units.get(name, ""))
            for name, vals in data.items()
        )
        return cls(cell_id, timestamps, cols)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def kpi_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> KpiColumn:
        for col in self.columns:
            if col.name == name:
                return col
        raise UnknownKpiError(
            f"KPI {name!r} not in frame {self.cell_id!r}; available: {self.kpi_names}"
        )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name).values

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Selected columns as an (M, k) array, in the requested order."""
        if not names:
            return np.empty((len(self), 0))
        return np.column_stack([self[n] for n in names])

    def restrict(self, timestamps: np.ndarray) -> "KpiFrame":
        """Rows whose timestamp is in ``timestamps`` (which must be a subset)."""
        mask = np.isin(self.timestamps, timestamps)
        cols = tuple(
            KpiColumn(c.name, c.values[mask], c.category, c.unit) for c in self.columns
        )
        return KpiFrame(self.cell_id, self.timestamps[mask], cols)

    def equals(self, other: "KpiFrame") -> bool:
        if self.cell_id != other.cell_id or not np.array_equal(
            self.timestamps, other.timestamps
        ):
            return False
        if len(self.columns) != len(other.columns):
            return False
        for a, b in zip(self.columns, other.columns):
            if (a.name, a.category, a.unit) != (b.name, b.category, b.unit):
                return False
            if not np.array_equal(a.values, b.values):
                return False
        return True


def _parse_float(text: str, row: int, col: int, header: str) -> float:
    text = text.strip()
    if not text:
        raise ParseError(f"empty value at line {row}, column {col} ({header!r})")
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"non-numeric value {text!r} at line {row}, column {col} ({header!r})"
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r} at line {row}, column {col} ({header!r})")
    return value


def _parse_text(text: str, cell_id: str, source: str) -> KpiFrame:
    rows = list(csv.reader(io.StringIO(text, newline="")))
    # tolerate trailing blank lines
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{source}: empty file")

    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError(f"{source}: header needs a timestamp column and at least one KPI")
    names = header[1:]
    if any(not n for n in names):
        raise ParseError(f"{source}: blank KPI name in header")
    k = len(names)

    categories = [Category.PM] * k
    units = [""] * k
    body_start = 1
    while body_start < len(rows) and rows[body_start] and rows[body_start][0].startswith("#"):
        meta = rows[body_start]
        line_no = body_start + 1
        if len(meta) != k + 1:
            raise ParseError(f"{source}: ragged metadata row at line {line_no}")
        tag = meta[0].strip().lower()
        if tag == "#category":
            try:
                categories = [Category(c.strip().upper()) for c in meta[1:]]
            except ValueError as exc:
                raise ParseError(f"{source}: bad category at line {line_no}: {exc}") from None
        elif tag == "#unit":
            units = [u.strip() for u in meta[1:]]
        else:
            raise ParseError(f"{source}: unknown metadata row {meta[0]!r} at line {line_no}")
        body_start += 1

    timestamps: list[int] = []
    values: list[list[float]] = [[] for _ in range(k)]
    for idx in range(body_start, len(rows)):
        row = rows[idx]
        line_no = idx + 1
        if len(row) != k + 1:
            raise ParseError(
                f"{source}: ragged row at line {line_no}: {len(row)} fields, expected {k + 1}"
            )
        ts_text = row[0].strip()
        try:
            timestamps.append(int(ts_text))
        except ValueError:
            raise ParseError(
                f"{source}: bad timestamp {ts_text!r} at line {line_no}, column 1"
            ) from None
        for j in range(k):
            values[j].append(_parse_float(row[j + 1], line_no, j + 2, names[j]))

    cols = tuple(
        KpiColumn(names[j], values[j], categories[j], units[j]) for j in range(k)
    )
    try:
        return KpiFrame(cell_id, timestamps, cols)
    except OrderError as exc:
        raise OrderError(f"{source}: {exc}") from None
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None


def load_csv(path: str | Path, cell_id: str | None = None) -> KpiFrame:
    """Read a KPI CSV file. ``cell_id`` defaults to the file stem."""
    path = Path(path)
    cell_id = path.stem if cell_id is None else cell_id
    # newline="" keeps \r\n handling inside the csv module
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return _parse_text(text, cell_id, str(path))


def parse_csv_text(text: str, cell_id: str) -> KpiFrame:
    return _parse_text(text, cell_id, "<text>")


def to_csv_text(frame: KpiFrame) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["timestamp", *frame.kpi_names])
    writer.writerow(["#category", *(c.category.value for c in frame.columns)])
    if any(c.unit for c in frame.columns):
        writer.writerow(["#unit", *(c.unit for c in frame.columns)])
    mat = frame.matrix(frame.kpi_names)
    for i, ts in enumerate(frame.timestamps):
        # repr gives the shortest string that round-trips the double exactly
        writer.writerow([int(ts), *(repr(float(v)) for v in mat[i])])
    return buf.getvalue()


def save_csv(frame: KpiFrame, path: str | Path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv_text(frame))
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def align(frames: Sequence[KpiFrame]) -> list[KpiFrame]:
    """Restrict every frame to the timestamps they all share."""
    if len(frames) < 2:
        raise ValueError("align needs at least two frames")
    common = frames[0].timestamps
    for fr in frames[1:]:
        common = np.intersect1d(common, fr.timestamps, assume_unique=True)
    if common.size == 0:
        ids = ", ".join(repr(f.cell_id) for f in frames)
        raise AlignmentError(f"no shared timestamps between frames {ids}")
    return [fr if len(fr) == common.size else fr.restrict(common) for fr in frames]


@dataclass(frozen=True)
class StandardizationRecord:
    """Per-column mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, np.float64))
        object.__setattr__(self, "std", _frozen(self.std, np.float64))
        object.__setattr__(self, "names", tuple(self.names))
        if np.any(self.std <= 0):
            raise DegenerateColumnError("standardization record with non-positive stddev")

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != len(self.mean):
            raise ShapeError(
                f"expected (M, {len(self.mean)}) matrix, got shape {matrix.shape}"
            )
        return (matrix - self.mean) / self.std

    def invert(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
        }


def standardize(
    matrix, names: Iterable[str] | None = None
) -> tuple[np.ndarray, StandardizationRecord]:
    """Center each column and scale it to unit population variance.

    Raises DegenerateColumnError naming the first constant column.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {mat.shape}")
    m, k = mat.shape
    names = tuple(names) if names is not None else tuple(f"col{j}" for j in range(k))
    if len(names) != k:
        raise ShapeError(f"{len(names)} names for {k} columns")
    if m < 2:
        raise ShapeError(f"standardization needs at least 2 rows, got {m}")

    mean = mat.mean(axis=0)
    centered = mat - mean
    std = np.sqrt((centered**2).mean(axis=0))
    scale = np.maximum(1.0, np.abs(mat).max(axis=0))
    for j in range(k):
        if not std[j] > _ZERO_STD_RTOL * scale[j]:
            raise DegenerateColumnError(
                f"column {names[j]!r} has zero variance", column=names[j]
            )
    return centered / std, StandardizationRecord(mean, std, names)
