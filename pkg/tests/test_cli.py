import hashlib
import json

import numpy as np
import pytest

from conftest import correlated_blocks
from rancca.cli import main
from rancca.kpi import KpiFrame, load_csv, save_csv

X_COLS = "unavailable_time,max_dl_tx_power,avg_users"
Y_COLS = "dl_prb,ul_prb,throughput,avg_users"


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--out-dir", str(out)]) == 0
    return out


def _analyze(sim_dir, out, x_cols=X_COLS, y_cols=Y_COLS, x="capacity.csv", y="coverage.csv", *extra):
    return main(
        [
            "analyze",
            "--x-csv", str(sim_dir / x),
            "--y-csv", str(sim_dir / y),
            "--x-cols", x_cols,
            "--y-cols", y_cols,
            "--out-dir", str(out),
            *extra,
        ]
    )


def _oracle_csvs(tmp_path, seed=0, m=50):
    X, Y = correlated_blocks(seed, m, 2, 3)
    ts = np.arange(m)
    xp = save_csv(KpiFrame.from_arrays("x", ts, {"a": X[:, 0], "b": X[:, 1]}), tmp_path / "x.csv")
    yp = save_csv(
        KpiFrame.from_arrays("y", ts, {"c": Y[:, 0], "d": Y[:, 1], "e": Y[:, 2]}), tmp_path / "y.csv"
    )
    return xp, yp


class TestSimulate:
    def test_default(self, sim_dir):
        for name in ("coverage.csv", "capacity.csv"):
            assert len(load_csv(sim_dir / name)) == 168
        manifest = json.loads((sim_dir / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 20240305
        assert manifest["config"]["hours"] == 168
        assert str(sim_dir / "coverage.csv") in manifest["outputs"]

    def test_stdout_is_machine_readable(self, tmp_path, capsys):
        assert main(["simulate", "--out-dir", str(tmp_path)]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1 and out[0].startswith("shutdown_hours=")

    def test_missing_config(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(tmp_path / "nope.cfg"), "--out-dir", str(tmp_path)])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("hours = 3\n")
        assert main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2

    def test_hours_override(self, tmp_path):
        assert main(["simulate", "--hours", "24", "--out-dir", str(tmp_path)]) == 0
        assert len(load_csv(tmp_path / "coverage.csv")) == 24

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "f"
        blocker.write_text("")
        assert main(["simulate", "--out-dir", str(blocker / "sub")]) == 3

    def test_config_file_and_manifest_reproduce(self, tmp_path, sim_dir):
        # the config echoed by the first run reproduces it bit-exactly
        out = tmp_path / "again"
        assert main(["simulate", "--config", str(sim_dir / "sim_config.cfg"), "--out-dir", str(out)]) == 0
        for name in ("coverage.csv", "capacity.csv"):
            assert (out / name).read_bytes() == (sim_dir / name).read_bytes()
        manifest = json.loads((out / "manifest.json").read_text())
        cfg_bytes = (sim_dir / "sim_config.cfg").read_bytes()
        assert manifest["inputs"] == {str(sim_dir / "sim_config.cfg"): hashlib.sha256(cfg_bytes).hexdigest()}

    def test_plot_series(self, tmp_path):
        assert main(["simulate", "--hours", "24", "--plot-series", "--out-dir", str(tmp_path)]) == 0
        lines = (tmp_path / "plot_series.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 6 * 24


class TestAnalyze:
    def test_happy_path(self, sim_dir, tmp_path, capsys):
        assert _analyze(sim_dir, tmp_path) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1 and out[0].startswith("rho1=")
        for name in ("report.json", "report.txt", "model.json", "manifest.json",
                     "table1.csv", "table2.csv", "table3.csv", "table4.csv"):
            assert (tmp_path / name).exists(), name
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        digest = hashlib.sha256((sim_dir / "capacity.csv").read_bytes()).hexdigest()
        assert manifest["inputs"][str(sim_dir / "capacity.csv")] == digest

    def test_self_pairing(self, sim_dir, tmp_path, capsys):
        code = _analyze(sim_dir, tmp_path, Y_COLS, Y_COLS, "coverage.csv", "coverage.csv")
        assert code == 0
        assert capsys.readouterr().out.strip() == "rho1=1.00000"

    def test_constant_column(self, sim_dir, tmp_path, capsys):
        code = _analyze(sim_dir, tmp_path, "avg_users", "unavailable_time")
        assert code == 4
        assert "unavailable_time" in capsys.readouterr().err

    def test_singular_covariance(self, tmp_path, capsys):
        ts = np.arange(30)
        rng = np.random.default_rng(0)
        a = rng.normal(size=30)
        fr = KpiFrame.from_arrays("c", ts, {"a": a, "b": 2 * a, "c": rng.normal(size=30)})
        path = save_csv(fr, tmp_path / "c.csv")
        code = main(["analyze", "--x-csv", str(path), "--y-csv", str(path), "--x-cols", "c",
                     "--y-cols", "a,b", "--out-dir", str(tmp_path / "o")])
        assert code == 4
        assert "ridge" in capsys.readouterr().err
        code = main(["analyze", "--x-csv", str(path), "--y-csv", str(path), "--x-cols", "c",
                     "--y-cols", "a,b", "--ridge", "1e-6", "--out-dir", str(tmp_path / "o")])
        assert code == 0

    def test_unknown_column(self, sim_dir, tmp_path):
        assert _analyze(sim_dir, tmp_path, "avg_user", Y_COLS) == 2

    def test_missing_input(self, sim_dir, tmp_path):
        assert _analyze(sim_dir, tmp_path, X_COLS, Y_COLS, "missing.csv") == 3

    def test_alignment_failure(self, tmp_path):
        a = save_csv(KpiFrame.from_arrays("a", np.arange(10), {"k": np.arange(10.0)}), tmp_path / "a.csv")
        b = save_csv(KpiFrame.from_arrays("b", np.arange(20, 30), {"k": np.arange(10.0)}), tmp_path / "b.csv")
        code = main(["analyze", "--x-csv", str(a), "--y-csv", str(b), "--x-cols", "k",
                     "--y-cols", "k", "--out-dir", str(tmp_path / "o")])
        assert code == 5

    def test_bad_arguments(self, tmp_path):
        assert main(["analyze", "--x-csv", "x"]) == 2
        assert main(["frobnicate"]) == 2

    def test_negative_ridge(self, sim_dir, tmp_path):
        assert _analyze(sim_dir, tmp_path, X_COLS, Y_COLS, "capacity.csv", "coverage.csv", "--ridge", "-1") == 2


class TestPairCrossVariable:
    def test_many_cells(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        paths = []
        for i in range(12):
            level = rng.normal()
            frame = KpiFrame.from_arrays(
                f"cell{i:02d}",
                np.arange(24),
                {
                    "tilt": np.full(24, 2.0 + level + 0.3 * rng.normal()),
                    "power": np.full(24, 40.0 + rng.normal()),
                    "prb": 30 + 5 * level + rng.normal(size=24),
                    "users": 10 + 2 * level + rng.normal(size=24),
                    "tput": 20 + rng.normal(size=24),
                },
                categories={"tilt": "CM", "power": "CM"},
            )
            paths.append(str(save_csv(frame, tmp_path / f"cell{i:02d}.csv")))
        code = main(["pair-cross-variable", "--csv", *paths, "--x-cols", "tilt,power",
                     "--y-cols", "prb,users,tput", "--out-dir", str(tmp_path / "o")])
        assert code == 0
        assert capsys.readouterr().out.startswith("rho1=")
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert (report["p"], report["q"]) == (2, 3)

    def test_single_cell(self, tmp_path):
        path = save_csv(KpiFrame.from_arrays("a", np.arange(5), {"k": np.arange(5.0)}), tmp_path / "a.csv")
        code = main(["pair-cross-variable", "--csv", str(path), "--x-cols", "k", "--y-cols", "k",
                     "--out-dir", str(tmp_path / "o")])
        assert code == 4


class TestOracle:
    def test_agrees(self, tmp_path, capsys):
        xp, yp = _oracle_csvs(tmp_path)
        code = main(["oracle", "--x-csv", str(xp), "--y-csv", str(yp), "--y-cols", "c,d"])
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert [line.split("=")[0] for line in out] == ["grid_max", "rho1", "diff"]

    def test_wrong_width(self, tmp_path):
        xp, yp = _oracle_csvs(tmp_path)
        assert main(["oracle", "--x-csv", str(xp), "--y-csv", str(yp)]) == 2

    def test_coarse_grid(self, tmp_path):
        # ten angles (18 degree steps) miss the optimum by more than 1e-3 on this data
        xp, yp = _oracle_csvs(tmp_path)
        assert main(["oracle", "--x-csv", str(xp), "--y-csv", str(yp), "--y-cols", "c,d",
                     "--grid-size", "10"]) == 6
