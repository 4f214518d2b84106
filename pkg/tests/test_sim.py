import math

import numpy as np
import pytest

from rancca.errors import ConfigError, ExportError
from rancca.kpi import load_csv, to_csv_text
from rancca.rng import SplitMix64
from rancca.sim import (
    KPI_NAMES,
    SimConfig,
    default_config,
    export,
    format_config,
    load_config,
    parse_config,
    simulate,
)


@pytest.fixture(scope="module")
def trace():
    return simulate(default_config())


class TestSplitMix64:
    def test_reference_outputs(self):
        rng = SplitMix64(1234567)
        assert [rng.next_u64() for _ in range(5)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ]

    def test_seed_zero(self):
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_normal_moments(self):
        rng = SplitMix64(99)
        draws = np.array([rng.normal() for _ in range(20000)])
        assert abs(draws.mean()) < 0.03
        assert abs(draws.std() - 1) < 0.03

    def test_uniform_range(self):
        rng = SplitMix64(5)
        u = [rng.uniform() for _ in range(1000)]
        assert min(u) >= 0.0 and max(u) < 1.0


class TestTrigger:
    def test_unsatisfiable_user_condition(self):
        tr = simulate(SimConfig().replace(user_threshold=0))
        assert not tr.shutdown_mask.any()

    def test_noise_free_crossing_hours(self):
        # DL sum = 150 (1 - cos phi) / 2 < 100  <=>  cos phi > -1/3, phi = 15 deg * (hour - 3).
        # arccos(-1/3) = 109.47 deg, so |hour - 3| <= 7: local hours 20..23 and 0..10.
        # UL peaks sum to 70, so the UL condition always holds.
        assert 7 * 15 < math.degrees(math.acos(-1 / 3)) < 8 * 15
        cfg = SimConfig().replace(
            coverage_dl_peak=80.0, coverage_dl_trough=0.0,
            capacity_dl_peak=70.0, capacity_dl_trough=0.0,
            coverage_ul_peak=40.0, coverage_ul_trough=0.0,
            capacity_ul_peak=30.0, capacity_ul_trough=0.0,
            noise_std=0.0,
            dl_prb_threshold=100.0, ul_prb_threshold=100.0, user_threshold=1e9,
        )
        tr = simulate(cfg)
        on_hours = set(range(0, 11)) | set(range(20, 24))
        expected = np.array([(ts % 24) in on_hours for ts in tr.coverage.timestamps])
        np.testing.assert_array_equal(tr.shutdown_mask, expected)
        assert tr.shutdown_mask.sum() == 7 * 15

    def test_mask_is_rederivable(self, trace):
        pol = trace.config.policy
        o = trace.offered
        rederived = (
            (o["capacity_dl"] + o["coverage_dl"] < pol.dl_prb_threshold)
            & (o["capacity_ul"] + o["coverage_ul"] < pol.ul_prb_threshold)
            & (o["capacity_users"] < pol.user_threshold)
        )
        np.testing.assert_array_equal(rederived, trace.shutdown_mask)


class TestTraceInvariants:
    def test_shutdown_hours(self, trace):
        m = trace.shutdown_mask
        assert m.any()
        assert np.all(trace.capacity["avg_users"][m] == 0)
        assert np.all(trace.capacity["unavailable_time"][m] == 60)
        assert np.all(trace.capacity["throughput"][m] == 0)
        assert np.all(trace.capacity["max_dl_tx_power"][m] == trace.config.tx_power_shutdown_w)
        assert np.all(trace.capacity["unavailable_time"][~m] == 0)

    def test_ranges(self, trace):
        for fr in (trace.coverage, trace.capacity):
            for link in ("dl_prb", "ul_prb"):
                assert np.all((fr[link] >= 0) & (fr[link] <= 100))
            assert set(np.unique(fr["unavailable_time"])) <= {0.0, 60.0}
            assert np.all(fr["throughput"] >= 0)
            assert np.all(fr["avg_users"] >= 0)
            np.testing.assert_array_equal(fr["avg_users"], np.round(fr["avg_users"]))

    def test_load_conservation(self, trace):
        m = trace.shutdown_mask
        o = trace.offered
        np.testing.assert_array_equal(
            trace.coverage["dl_prb"][m], np.minimum(100.0, o["coverage_dl"][m] + o["capacity_dl"][m])
        )
        np.testing.assert_array_equal(
            trace.coverage["ul_prb"][m], np.minimum(100.0, o["coverage_ul"][m] + o["capacity_ul"][m])
        )
        np.testing.assert_array_equal(trace.coverage["dl_prb"][~m], o["coverage_dl"][~m])

    def test_clipping_at_full_load(self):
        cfg = SimConfig().replace(
            coverage_dl_peak=100.0, coverage_dl_trough=90.0,
            capacity_dl_peak=60.0, capacity_dl_trough=50.0,
            dl_prb_threshold=100.0, ul_prb_threshold=100.0, user_threshold=1e9,
        )
        # DL sum always >= 140, so the trigger never fires and nothing is merged
        assert not simulate(cfg).shutdown_mask.any()

    def test_users_follow_rounded_coupling(self, trace):
        cfg = trace.config
        active = ~trace.shutdown_mask
        expected = np.floor(cfg.users_per_prb * trace.capacity["dl_prb"][active] + 0.5)
        np.testing.assert_array_equal(trace.capacity["avg_users"][active], expected)

    def test_frames_share_timestamps(self, trace):
        np.testing.assert_array_equal(trace.coverage.timestamps, trace.capacity.timestamps)
        assert trace.coverage.kpi_names == list(KPI_NAMES)

    def test_default_shutdown_hours_per_day(self, trace):
        per_day = trace.shutdown_mask.reshape(-1, 24).sum(axis=1)
        assert np.all((per_day >= 5) & (per_day <= 9)), per_day
        assert np.all(trace.shutdown_mask.reshape(-1, 24)[:, 12:18] == 0)


class TestDeterminism:
    def test_bit_identical(self):
        a, b = simulate(default_config()), simulate(default_config())
        assert a.coverage.equals(b.coverage) and a.capacity.equals(b.capacity)
        np.testing.assert_array_equal(a.shutdown_mask, b.shutdown_mask)
        assert to_csv_text(a.capacity) == to_csv_text(b.capacity)

    def test_seed_matters(self):
        a = simulate(SimConfig(seed=1))
        b = simulate(SimConfig(seed=2))
        assert not a.coverage.equals(b.coverage)


class TestExport:
    def test_round_trip(self, trace, tmp_path):
        cov, cap = export(trace, tmp_path)
        assert load_csv(cov).equals(trace.coverage)
        assert load_csv(cap).equals(trace.capacity)

    def test_unwritable_directory(self, trace, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ExportError):
            export(trace, blocker / "sub")

    def test_day_long_config(self, tmp_path):
        cov, cap = export(simulate(SimConfig(hours=24)), tmp_path)
        assert len(load_csv(cov)) == 24
        lines = cap.read_text().splitlines()
        assert len(lines) == 24 + 3


class TestConfig:
    def test_committed_default_matches_dataclass(self):
        assert default_config() == SimConfig()

    def test_format_round_trip(self):
        cfg = SimConfig().replace(seed=77, hours=48, user_threshold=3.0)
        assert parse_config(format_config(cfg)) == cfg

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# comment\n\nhours = 48  # two days\nseed=0x10\n")
        assert cfg.hours == 48 and cfg.seed == 16

    @pytest.mark.parametrize(
        "text",
        [
            "nonsense = 1",
            "hours",
            "hours = many",
            "hours = 12",
            "hours = 48\nhours = 72",
            "noise_std = -1",
            "dl_prb_threshold = 0",
            "ul_prb_threshold = 150",
            "coverage_dl_peak = 2.0",
            "seed = -5",
        ],
    )
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.cfg")
