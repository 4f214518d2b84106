"""``rancca`` command line: simulate, analyze, pair-cross-variable, oracle.

Exit codes:
    0  success
    2  invalid arguments, unparseable input or bad config
    3  I/O failure
    4  degenerate data (zero-variance column, singular covariance, too few rows)
    5  timestamp alignment failure
    6  oracle and solver disagree

Result lines (``key=value``) go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .cca import fit
from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateColumnError,
    ExportError,
    OrderError,
    ParseError,
    ShapeError,
    SingleFrameError,
    SingularCovarianceError,
    UnderdeterminedError,
    UnknownKpiError,
)
from .kpi import load_csv
from .oracle import grid_max_correlation
from .pairing import PairedDataset, pair_cross_cell, pair_cross_variable
from .report import build_report, export_plot_series, render, render_csv_tables, write_plot_series
from .sim import KPI_NAMES, default_config_text, export, format_config, parse_config, simulate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4
EXIT_ALIGNMENT = 5
EXIT_ORACLE = 6

ORACLE_TOL = 1e-3


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    config: dict | None = None
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")
        return path


def _diag(level: str, msg: str) -> None:
    print(f"{level}: {msg}", file=sys.stderr)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _cols(text: str) -> list[str]:
    cols = [c.strip() for c in text.split(",") if c.strip()]
    if not cols:
        raise argparse.ArgumentTypeError("expected a comma-separated list of column names")
    return cols


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {path}: {exc}") from exc
    return path


def _write(path: Path, data: bytes) -> str:
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return str(path)


# -- subcommands ------------------------------------------------------------

def cmd_simulate(args) -> int:
    if args.config is None:
        text = default_config_text()
        source = "<default>"
    else:
        try:
            raw = Path(args.config).read_bytes()
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        text = raw.decode("utf-8")
        source = str(args.config)
    config = parse_config(text)
    overrides = {}
    if args.hours is not None:
        overrides["hours"] = args.hours
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = config.replace(**overrides)

    out_dir = _ensure_dir(Path(args.out_dir))
    trace = simulate(config)
    outputs = [str(p) for p in export(trace, out_dir)]
    outputs.append(_write(out_dir / "sim_config.cfg", format_config(config).encode("utf-8")))
    if args.plot_series:
        outputs.append(str(write_plot_series(export_plot_series(trace, KPI_NAMES), out_dir / "plot_series.csv")))

    RunManifest(
        command="simulate",
        argv=list(args.argv),
        inputs={source: _sha256(text.encode("utf-8"))},
        outputs=outputs,
        config=config.to_dict(),
        seed=config.seed,
    ).write(out_dir)
    print(f"shutdown_hours={int(trace.shutdown_mask.sum())}")
    return EXIT_OK


def _write_analysis(args, data: PairedDataset, inputs: dict[str, str]) -> int:
    model = fit(data, ridge=args.ridge)
    report = build_report(model, data)
    out_dir = _ensure_dir(Path(args.out_dir))
    outputs = [
        _write(out_dir / "report.json", render(report, "json")),
        _write(out_dir / "report.txt", render(report, "text")),
        _write(out_dir / "model.json", (json.dumps(model.to_dict(), indent=2) + "\n").encode("utf-8")),
    ]
    for name, blob in render_csv_tables(report).items():
        outputs.append(_write(out_dir / f"{name}.csv", blob))
    RunManifest(command=args.command, argv=list(args.argv), inputs=inputs, outputs=outputs).write(out_dir)
    if data.swapped:
        _diag("warning", "X and Y blocks swapped so that p <= q")
    print(f"rho1={report.rho1:.5f}")
    return EXIT_OK


def _hashes(paths: Sequence[str]) -> dict[str, str]:
    return {str(p): _sha256(Path(p).read_bytes()) for p in paths}


def cmd_analyze(args) -> int:
    frame_x = load_csv(args.x_csv)
    frame_y = load_csv(args.y_csv)
    data = pair_cross_cell(frame_x, frame_y, args.x_cols, args.y_cols)
    return _write_analysis(args, data, _hashes([args.x_csv, args.y_csv]))


def cmd_pair_cross_variable(args) -> int:
    frames = [load_csv(p) for p in args.csv]
    data = pair_cross_variable(frames, args.x_cols, args.y_cols, args.aggregator)
    return _write_analysis(args, data, _hashes(args.csv))


def cmd_oracle(args) -> int:
    frame_x = load_csv(args.x_csv)
    frame_y = load_csv(args.y_csv)
    x_cols = args.x_cols or frame_x.kpi_names
    y_cols = args.y_cols or frame_y.kpi_names
    if len(x_cols) != 2 or len(y_cols) != 2:
        _diag("error", f"oracle needs exactly two X and two Y columns, got p={len(x_cols)}, q={len(y_cols)}")
        return EXIT_USAGE
    data = pair_cross_cell(frame_x, frame_y, x_cols, y_cols)
    grid_max, _, _ = grid_max_correlation(data.X, data.Y, args.grid_size)
    rho1 = float(fit(data).rho[0])
    diff = abs(grid_max - rho1)
    print(f"grid_max={grid_max:.10f}")
    print(f"rho1={rho1:.10f}")
    print(f"diff={diff:.3e}")
    if diff > ORACLE_TOL:
        _diag("error", f"solver and grid search differ by {diff:.3e} (> {ORACLE_TOL:g}); grid may be too coarse")
        return EXIT_ORACLE
    return EXIT_OK


# -- entry point ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rancca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rancca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic coverage/capacity cell trace")
    sim.add_argument("--config", help="key=value config file (default: packaged default)")
    sim.add_argument("--out-dir", required=True)
    sim.add_argument("--hours", type=int, help="override the number of simulated hours")
    sim.add_argument("--seed", type=int, help="override the seed")
    sim.add_argument("--plot-series", action="store_true", help="also write plot_series.csv")
    sim.set_defaults(func=cmd_simulate)

    def add_fit_flags(p):
        p.add_argument("--x-cols", type=_cols, required=True, help="comma-separated X KPIs")
        p.add_argument("--y-cols", type=_cols, required=True, help="comma-separated Y KPIs")
        p.add_argument("--ridge", type=float, default=0.0)
        p.add_argument("--out-dir", required=True)

    ana = sub.add_parser("analyze", help="CCA between two cells of one sector")
    ana.add_argument("--x-csv", required=True)
    ana.add_argument("--y-csv", required=True)
    add_fit_flags(ana)
    ana.set_defaults(func=cmd_analyze)

    pcv = sub.add_parser("pair-cross-variable", help="CCA across cells of time-aggregated KPIs")
    pcv.add_argument("--csv", nargs="+", required=True, help="one KPI CSV per cell")
    pcv.add_argument("--aggregator", choices=("mean", "sum", "last"), default="mean")
    add_fit_flags(pcv)
    pcv.set_defaults(func=cmd_pair_cross_variable)

    ora = sub.add_parser("oracle", help="compare the solver with a brute-force grid search (p=q=2)")
    ora.add_argument("--x-csv", required=True)
    ora.add_argument("--y-csv", required=True)
    ora.add_argument("--x-cols", type=_cols)
    ora.add_argument("--y-cols", type=_cols)
    ora.add_argument("--grid-size", type=int, default=2000)
    ora.set_defaults(func=cmd_oracle)
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, AlignmentError):
        return EXIT_ALIGNMENT
    if isinstance(exc, (DegenerateColumnError, SingularCovarianceError, UnderdeterminedError, SingleFrameError)):
        return EXIT_DEGENERATE
    if isinstance(exc, (ExportError, OSError)):
        return EXIT_IO
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    if getattr(args, "ridge", 0.0) < 0:
        _diag("error", "--ridge must be nonnegative")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (
        AlignmentError,
        ConfigError,
        DegenerateColumnError,
        ExportError,
        OrderError,
        ParseError,
        ShapeError,
        SingleFrameError,
        SingularCovarianceError,
        UnderdeterminedError,
        UnknownKpiError,
        OSError,
        UnicodeDecodeError,
    ) as exc:
        code = _exit_code(exc)
        _diag("error", str(exc))
        return code


if __name__ == "__main__":
    sys.exit(main())
