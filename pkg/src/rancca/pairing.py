"""Build the two-block (X, Y) datasets that CCA consumes.

Two arrangements are supported:

* cross-cell: two cells of one sector, rows are the shared hours;
* cross-variable: many cells, one row per cell holding a time aggregate
  of each KPI.

Blocks are always standardized and ordered so that X has no more columns
than Y; a caller-supplied p > q is swapped and the swap recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ShapeError, SingleFrameError
from .kpi import KpiFrame, StandardizationRecord, align, standardize

__all__ = [
    "Arrangement",
    "PairedDataset",
    "pair_cross_cell",
    "pair_cross_variable",
]

AGGREGATORS = {
    "mean": lambda v: float(np.mean(v)),
    "sum": lambda v: float(np.sum(v)),
    "last": lambda v: float(v[-1]),
}


class Arrangement(str, Enum):
    CROSS_VARIABLE = "cross-variable"
    CROSS_CELL = "cross-cell"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PairedDataset:
    """Aligned, standardized X (M x p) and Y (M x q) blocks."""

    X: np.ndarray
    Y: np.ndarray
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    arrangement: Arrangement
    x_record: StandardizationRecord
    y_record: StandardizationRecord
    provenance: dict = field(default_factory=dict)
    swapped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "X", _readonly(self.X))
        object.__setattr__(self, "Y", _readonly(self.Y))
        object.__setattr__(self, "x_labels", tuple(self.x_labels))
        object.__setattr__(self, "y_labels", tuple(self.y_labels))
        object.__setattr__(self, "arrangement", Arrangement(self.arrangement))
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ShapeError("X and Y must be 2-D")
        if self.X.shape[0] != self.Y.shape[0]:
            raise ShapeError(f"row mismatch: X has {self.X.shape[0]}, Y has {self.Y.shape[0]}")
        if self.p < 1 or self.q < 1:
            raise ShapeError("each block needs at least one column")
        if self.p > self.q:
            raise ShapeError("blocks must satisfy p <= q; construct via from_arrays")
        for labels, width, block in ((self.x_labels, self.p, "X"), (self.y_labels, self.q, "Y")):
            if len(labels) != width:
                raise ShapeError(f"{block} has {width} columns but {len(labels)} labels")
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate labels in {block} block: {labels}")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def q(self) -> int:
        return self.Y.shape[1]

    @property
    def standardized(self) -> bool:
        return self.x_record is not None and self.y_record is not None

    def raw_x(self) -> np.ndarray:
        return self.x_record.invert(self.X)

    def raw_y(self) -> np.ndarray:
        return self.y_record.invert(self.Y)

    @classmethod
    def from_arrays(
        cls,
        X,
        Y,
        x_labels: Sequence[str] | None = None,
        y_labels: Sequence[str] | None = None,
        arrangement: Arrangement = Arrangement.CROSS_CELL,
        provenance: dict | None = None,
    ) -> "PairedDataset":
        """Standardize raw blocks and enforce p <= q (swapping if needed)."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise ShapeError("X and Y must be 1-D or 2-D")
        if X.shape[0] != Y.shape[0]:
            raise ShapeError(f"row mismatch: X has {X.shape[0]}, Y has {Y.shape[0]}")
        x_labels = tuple(x_labels) if x_labels is not None else tuple(f"x{j}" for j in range(X.shape[1]))
        y_labels = tuple(y_labels) if y_labels is not None else tuple(f"y{j}" for j in range(Y.shape[1]))
        provenance = dict(provenance or {})

        swapped = X.shape[1] > Y.shape[1]
        if swapped:
            X, Y = Y, X
            x_labels, y_labels = y_labels, x_labels
            if "x_cells" in provenance or "y_cells" in provenance:
                provenance["x_cells"], provenance["y_cells"] = (
                    provenance.get("y_cells"),
                    provenance.get("x_cells"),
                )

        Xs, x_rec = standardize(X, x_labels)
        Ys, y_rec = standardize(Y, y_labels)
        return cls(Xs, Ys, x_labels, y_labels, arrangement, x_rec, y_rec, provenance, swapped)


def _check_unique(names: Sequence[str], what: str) -> None:
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate names in {what}: {list(names)}")


def pair_cross_cell(
    frame_x: KpiFrame,
    frame_y: KpiFrame,
    x_kpis: Sequence[str],
    y_kpis: Sequence[str],
) -> PairedDataset:
    """Pair KPIs of two same-sector cells over their shared hours."""
    _check_unique(x_kpis, "x_kpis")
    _check_unique(y_kpis, "y_kpis")
    # name lookups first so a typo is reported before alignment problems
    for n in x_kpis:
        frame_x.column(n)
    for n in y_kpis:
        frame_y.column(n)

    fx, fy = align([frame_x, frame_y])
    ts = fx.timestamps
    provenance = {
        "x_cells": [frame_x.cell_id],
        "y_cells": [frame_y.cell_id],
        "time_range": [int(ts[0]), int(ts[-1])],
    }
    return PairedDataset.from_arrays(
        fx.matrix(x_kpis),
        fy.matrix(y_kpis),
        x_kpis,
        y_kpis,
        Arrangement.CROSS_CELL,
        provenance,
    )


def pair_cross_variable(
    frames: Sequence[KpiFrame],
    x_kpis: Sequence[str],
    y_kpis: Sequence[str],
    aggregator: str = "mean",
) -> PairedDataset:
    """One row per cell (sorted by cell id) of time-aggregated KPIs."""
    if len(frames) < 2:
        raise SingleFrameError(f"cross-variable pairing needs >= 2 cells, got {len(frames)}")
    if aggregator not in AGGREGATORS:
        raise ValueError(f"aggregator must be one of {sorted(AGGREGATORS)}, got {aggregator!r}")
    _check_unique(x_kpis, "x_kpis")
    _check_unique(y_kpis, "y_kpis")
    ids = [f.cell_id for f in frames]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate cell ids: {ids}")

    agg = AGGREGATORS[aggregator]
    ordered = sorted(frames, key=lambda f: f.cell_id)
    X = np.array([[agg(f[n]) for n in x_kpis] for f in ordered])
    Y = np.array([[agg(f[n]) for n in y_kpis] for f in ordered])
    cells = [f.cell_id for f in ordered]
    nonempty = [f for f in ordered if len(f)]
    provenance = {
        "x_cells": cells,
        "y_cells": cells,
        "time_range": (
            [int(min(f.timestamps[0] for f in nonempty)), int(max(f.timestamps[-1] for f in nonempty))]
            if nonempty
            else None
        ),
        "aggregator": aggregator,
    }
    return PairedDataset.from_arrays(
        X, Y, x_kpis, y_kpis, Arrangement.CROSS_VARIABLE, provenance
    )
