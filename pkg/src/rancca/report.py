"""Loadings tables for the first canonical pair, and their serializations.

Four square tables are produced, each with the canonical variate in the
first row and column and pairwise variable correlations elsewhere:

=========  ==========  ===========
table      variate     variables
=========  ==========  ===========
table1     U1 (CCX1)   X block
table2     V1 (CCY1)   Y block
table3     U1 (CCX1)   Y block
table4     V1 (CCY1)   X block
=========  ==========  ===========

Tables 3 and 4 hold cross-loadings; for a ridge-free fit their first rows
equal rho1 times the first rows of tables 2 and 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cca import CcaModel, loadings, pearson_matrix
from .errors import ShapeError
from .pairing import PairedDataset
from .sim import SectorTrace

__all__ = [
    "CorrTable",
    "LoadingsReport",
    "PlotSeries",
    "build_report",
    "render",
    "render_csv_tables",
    "parse_report_json",
    "cross_loading_residuals",
    "export_plot_series",
    "write_plot_series",
]

DECIMALS = 5
TABLE_NAMES = ("table1", "table2", "table3", "table4")
U_LABEL = "CCX1"
V_LABEL = "CCY1"
TITLES = {
    "table1": "Correlation of X variables with the first X canonical variate",
    "table2": "Correlation of Y variables with the first Y canonical variate",
    "table3": "Correlation of Y variables with the first X canonical variate",
    "table4": "Correlation of X variables with the first Y canonical variate",
}


@dataclass(frozen=True)
class CorrTable:
    name: str
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.shape != (len(self.labels), len(self.labels)):
            raise ShapeError(f"{self.name}: {values.shape} values for {len(self.labels)} labels")

    @property
    def title(self) -> str:
        return TITLES.get(self.name, self.name)

    @property
    def rounded(self) -> np.ndarray:
        return np.round(self.values, DECIMALS)

    @property
    def first_row(self) -> np.ndarray:
        """Variate-to-variable correlations (diagonal entry excluded)."""
        return self.values[0, 1:]


@dataclass(frozen=True)
class LoadingsReport:
    rho1: float
    rho: tuple[float, ...]
    table1: CorrTable
    table2: CorrTable
    table3: CorrTable
    table4: CorrTable
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    swapped: bool = False

    @property
    def tables(self) -> tuple[CorrTable, ...]:
        return (self.table1, self.table2, self.table3, self.table4)

    @property
    def p(self) -> int:
        return len(self.x_labels)

    @property
    def q(self) -> int:
        return len(self.y_labels)

    def validate(self, tol: float = 1e-8) -> None:
        """Check range, unit diagonals and the cross-loading identity."""
        for t in self.tables:
            if np.any(np.abs(t.values) > 1.0):
                raise ValueError(f"{t.name}: entry outside [-1, 1]")
            if not np.all(np.diag(t.values) == 1.0):
                raise ValueError(f"{t.name}: diagonal is not exactly 1")
        for cross, within in ((self.table3, self.table2), (self.table4, self.table1)):
            worst = np.max(np.abs(cross_loading_residuals(self.rho1, within.first_row, cross.first_row)))
            if worst > tol:
                raise ValueError(
                    f"{cross.name} violates cross-loading identity by {worst:.3e} (tol {tol:g})"
                )


def cross_loading_residuals(rho1: float, within, cross) -> np.ndarray:
    """``cross - rho1 * within``; zero for an exact ridge-free CCA fit."""
    return np.asarray(cross, dtype=np.float64) - rho1 * np.asarray(within, dtype=np.float64)


def _bordered(loading: np.ndarray, var_corr: np.ndarray) -> np.ndarray:
    k = len(loading)
    out = np.empty((k + 1, k + 1))
    out[0, 0] = 1.0
    out[0, 1:] = loading
    out[1:, 0] = loading
    out[1:, 1:] = var_corr
    return np.clip(out, -1.0, 1.0)


def build_report(model: CcaModel, data: PairedDataset) -> LoadingsReport:
    if data.p != model.p or data.q != model.q:
        raise ShapeError(
            f"dataset has p={data.p}, q={data.q}; model expects p={model.p}, q={model.q}"
        )
    x_within, y_within, x_cross, y_cross = loadings(model, data, 0)
    rxx = pearson_matrix(data.X)
    ryy = pearson_matrix(data.Y)
    xl, yl = tuple(data.x_labels), tuple(data.y_labels)
    report = LoadingsReport(
        rho1=float(model.rho[0]),
        rho=tuple(float(r) for r in model.rho),
        table1=CorrTable("table1", (U_LABEL, *xl), _bordered(x_within, rxx)),
        table2=CorrTable("table2", (V_LABEL, *yl), _bordered(y_within, ryy)),
        table3=CorrTable("table3", (U_LABEL, *yl), _bordered(y_cross, ryy)),
        table4=CorrTable("table4", (V_LABEL, *xl), _bordered(x_cross, rxx)),
        x_labels=xl,
        y_labels=yl,
        swapped=data.swapped,
    )
    if model.ridge == 0:
        report.validate()
    return report


# -- rendering -----------------------------------------------------------

def _round(x: float) -> float:
    return round(float(x), DECIMALS)


def _report_dict(report: LoadingsReport) -> dict:
    tables = {}
    raw_tables = {}
    for t in report.tables:
        tables[t.name] = {
            "title": t.title,
            "labels": list(t.labels),
            "values": [[_round(v) for v in row] for row in t.values],
        }
        raw_tables[t.name] = [[float(v) for v in row] for row in t.values]
    return {
        "rho1": _round(report.rho1),
        "rho": [_round(r) for r in report.rho],
        "p": report.p,
        "q": report.q,
        "x_labels": list(report.x_labels),
        "y_labels": list(report.y_labels),
        "swapped": report.swapped,
        "tables": tables,
        "raw": {
            "rho1": float(report.rho1),
            "rho": [float(r) for r in report.rho],
            "tables": raw_tables,
        },
    }


def format_table_text(table: CorrTable) -> list[str]:
    """Fixed-width lines: one header line plus one line per row."""
    width = max(9, max(len(l) for l in table.labels))
    header = " " * width + "".join(f" {l:>{width}}" for l in table.labels)
    lines = [header.rstrip()]
    for label, row in zip(table.labels, table.values):
        lines.append(f"{label:<{width}}" + "".join(f" {v:>{width}.{DECIMALS}f}" for v in row))
    return lines


def _render_text(report: LoadingsReport, tables: Sequence[CorrTable]) -> str:
    lines = [f"first canonical correlation: {report.rho1:.{DECIMALS}f}"]
    if len(report.rho) > 1:
        lines.append("all canonical correlations: " + ", ".join(f"{r:.{DECIMALS}f}" for r in report.rho))
    if report.swapped:
        lines.append("note: input blocks were swapped so that X is the narrower block")
    for t in tables:
        lines += ["", f"{t.name}: {t.title}", *format_table_text(t)]
    return "\n".join(lines) + "\n"


def _render_csv(table: CorrTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["", *table.labels])
    for label, row in zip(table.labels, table.values):
        writer.writerow([label, *(f"{v:.{DECIMALS}f}" for v in row)])
    return buf.getvalue()


def render(report: LoadingsReport, fmt: str = "json", table: str | None = None) -> bytes:
    """Serialize a report as ``json``, ``csv`` (one table, default table1) or ``text``."""
    if fmt == "json":
        return (json.dumps(_report_dict(report), indent=2) + "\n").encode("utf-8")
    by_name = {t.name: t for t in report.tables}
    if table is not None and table not in by_name:
        raise KeyError(f"unknown table {table!r}; choose from {list(by_name)}")
    if fmt == "csv":
        return _render_csv(by_name[table or "table1"]).encode("utf-8")
    if fmt == "text":
        chosen = [by_name[table]] if table else list(report.tables)
        return _render_text(report, chosen).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}; choose json, csv or text")


def render_csv_tables(report: LoadingsReport) -> dict[str, bytes]:
    return {t.name: render(report, "csv", t.name) for t in report.tables}


def parse_report_json(blob: bytes | str) -> LoadingsReport:
    """Rebuild a report from :func:`render` JSON, using the full-precision values."""
    doc = json.loads(blob)
    raw = doc["raw"]
    tables = {
        name: CorrTable(name, doc["tables"][name]["labels"], raw["tables"][name])
        for name in TABLE_NAMES
    }
    return LoadingsReport(
        rho1=raw["rho1"],
        rho=tuple(raw["rho"]),
        x_labels=tuple(doc["x_labels"]),
        y_labels=tuple(doc["y_labels"]),
        swapped=doc["swapped"],
        **tables,
    )


# -- plot-ready series ----------------------------------------------------

@dataclass(frozen=True)
class PlotSeries:
    name: str
    timestamps: np.ndarray
    values: np.ndarray
    role: str

    def __post_init__(self):
        if len(self.timestamps) != len(self.values):
            raise ShapeError(f"series {self.name!r}: length mismatch")


def export_plot_series(trace: SectorTrace, kpis: Sequence[str]) -> list[PlotSeries]:
    """One series per (cell role, KPI), coverage first."""
    out = []
    for role in ("coverage", "capacity"):
        frame = trace.frame(role)
        for name in kpis:
            out.append(PlotSeries(name, frame.timestamps, frame[name], role))
    return out


def write_plot_series(series: Sequence[PlotSeries], path: str | Path) -> Path:
    """Long-format CSV: ``role,kpi,timestamp,value``."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["role", "kpi", "timestamp", "value"])
        for s in series:
            for ts, v in zip(s.timestamps, s.values):
                writer.writerow([s.role, s.name, int(ts), repr(float(v))])
    return path
