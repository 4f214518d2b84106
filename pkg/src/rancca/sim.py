"""Synthetic one-sector traces with threshold-based capacity-cell shutdown.

Each hour the coverage and capacity cells get an offered PRB load (a
24-hour sinusoid with its trough at local hour 3, plus Gaussian noise).
The capacity cell is switched off for the hour when all three hold on the
offered (pre-shutdown) values:

    dl_cap + dl_cov < dl_prb_threshold
    ul_cap + ul_cov < ul_prb_threshold
    users_cap       < user_threshold

While off, its load moves onto the coverage cell (clipped at 100 %), and
its users, PRB usage and throughput drop to 0, unavailable time is 60
minutes and TX power is the shutdown wattage. The same condition, negated,
wakes the cell up; there is no hysteresis.

Noise comes from :class:`rancca.rng.SplitMix64`, drawn per hour in the
order given by ``NOISE_ORDER``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, ExportError
from .kpi import KpiColumn, KpiFrame, save_csv
from .rng import SplitMix64

__all__ = [
    "ShutdownPolicy",
    "SimConfig",
    "SectorTrace",
    "simulate",
    "export",
    "load_config",
    "parse_config",
    "format_config",
    "default_config",
    "DEFAULT_CONFIG_NAME",
    "KPI_NAMES",
]

DEFAULT_CONFIG_NAME = "default_sim.cfg"

KPI_NAMES = (
    "dl_prb",
    "ul_prb",
    "unavailable_time",
    "max_dl_tx_power",
    "throughput",
    "avg_users",
)
KPI_UNITS = {
    "dl_prb": "percent",
    "ul_prb": "percent",
    "unavailable_time": "min",
    "max_dl_tx_power": "W",
    "throughput": "Mbit/s",
    "avg_users": "count",
}
NOISE_ORDER = (
    "coverage_dl",
    "coverage_ul",
    "capacity_dl",
    "capacity_ul",
    "coverage_throughput",
    "capacity_throughput",
    "coverage_tx_power",
    "capacity_tx_power",
)
TROUGH_HOUR = 3
MINUTES_PER_HOUR = 60.0


@dataclass(frozen=True)
class ShutdownPolicy:
    dl_prb_threshold: float = 30.0
    ul_prb_threshold: float = 20.0
    user_threshold: float = 10.0

    def __post_init__(self):
        for name in ("dl_prb_threshold", "ul_prb_threshold"):
            value = getattr(self, name)
            if not 0 < value <= 100:
                raise ConfigError(f"{name} must be in (0, 100], got {value}")
        if not self.user_threshold >= 0:
            raise ConfigError(f"user_threshold must be >= 0, got {self.user_threshold}")

    def triggers(self, dl_cov, ul_cov, dl_cap, ul_cap, users_cap) -> bool:
        return (
            dl_cap + dl_cov < self.dl_prb_threshold
            and ul_cap + ul_cov < self.ul_prb_threshold
            and users_cap < self.user_threshold
        )


@dataclass(frozen=True)
class SimConfig:
    """Traffic shape, radio and threshold parameters for one sector.

    PRB levels are percent; ``users_per_prb`` converts DL PRB percent to
    users; throughput is ``throughput_intercept + throughput_slope * dl_prb``
    plus noise. Active max TX power is
    ``tx_power_active_w * (1 - tx_power_load_backoff * (1 - dl_prb / 100))``
    plus noise, so it tracks load; set the backoff and its noise to 0 for a
    constant active wattage.
    """

    seed: int = 20240305
    hours: int = 168
    start_epoch_hour: int = 474864
    coverage_dl_peak: float = 60.0
    coverage_dl_trough: float = 8.0
    coverage_ul_peak: float = 30.0
    coverage_ul_trough: float = 3.0
    capacity_dl_peak: float = 50.0
    capacity_dl_trough: float = 4.0
    capacity_ul_peak: float = 25.0
    capacity_ul_trough: float = 2.0
    noise_std: float = 3.0
    users_per_prb: float = 0.8
    tx_power_active_w: float = 40.0
    tx_power_shutdown_w: float = 0.0
    tx_power_load_backoff: float = 0.25
    tx_power_noise_std: float = 1.0
    throughput_intercept: float = 2.0
    throughput_slope: float = 0.9
    throughput_noise_std: float = 2.0
    policy: ShutdownPolicy = field(default_factory=ShutdownPolicy)

    def __post_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not isinstance(self.hours, int) or self.hours < 24:
            raise ConfigError(f"hours must be an integer >= 24, got {self.hours!r}")
        for cell in ("coverage", "capacity"):
            for link in ("dl", "ul"):
                peak = getattr(self, f"{cell}_{link}_peak")
                trough = getattr(self, f"{cell}_{link}_trough")
                if not (0 <= trough < peak <= 100):
                    raise ConfigError(
                        f"{cell}_{link}: need 0 <= trough < peak <= 100, got {trough}, {peak}"
                    )
        for name in (
            "noise_std",
            "users_per_prb",
            "tx_power_active_w",
            "tx_power_shutdown_w",
            "tx_power_noise_std",
            "throughput_noise_std",
        ):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0 <= self.tx_power_load_backoff <= 1:
            raise ConfigError("tx_power_load_backoff must be in [0, 1]")

    def replace(self, **changes) -> "SimConfig":
        policy_keys = {f.name for f in dataclasses.fields(ShutdownPolicy)}
        policy_changes = {k: changes.pop(k) for k in list(changes) if k in policy_keys}
        policy = dataclasses.replace(self.policy, **policy_changes)
        return dataclasses.replace(self, policy=policy, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "policy":
                out.update(dataclasses.asdict(self.policy))
            else:
                out[f.name] = getattr(self, f.name)
        return out


@dataclass(frozen=True)
class SectorTrace:
    """Simulated coverage and capacity frames plus the shutdown decisions.

    ``offered`` holds the pre-shutdown loads the trigger was evaluated on:
    keys ``coverage_dl``, ``coverage_ul``, ``capacity_dl``, ``capacity_ul``
    and ``capacity_users``.
    """

    coverage: KpiFrame
    capacity: KpiFrame
    shutdown_mask: np.ndarray
    offered: dict
    config: SimConfig

    def frame(self, role: str) -> KpiFrame:
        if role not in ("coverage", "capacity"):
            raise ValueError(f"role must be 'coverage' or 'capacity', got {role!r}")
        return getattr(self, role)


# -- config file ---------------------------------------------------------

def _field_types() -> dict:
    types = {f.name: f.type for f in dataclasses.fields(SimConfig) if f.name != "policy"}
    types.update({f.name: f.type for f in dataclasses.fields(ShutdownPolicy)})
    return types


def _convert(key: str, text: str, type_name) -> object:
    try:
        if type_name in (int, "int"):
            return int(text, 0)
        return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    types = _field_types()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, val, types[key])
    base = base or SimConfig()
    return base.replace(**values)


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def format_config(config: SimConfig) -> str:
    return "".join(f"{k} = {v!r}\n" for k, v in config.to_dict().items())


def default_config_text() -> str:
    return resources.files("rancca").joinpath("data").joinpath(DEFAULT_CONFIG_NAME).read_text(
        encoding="utf-8"
    )


def default_config() -> SimConfig:
    """The committed default configuration shipped with the package."""
    return parse_config(default_config_text())


# -- simulation ----------------------------------------------------------

def _round_half_up(x: float) -> float:
    return float(math.floor(x + 0.5))


def _clip(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


def diurnal_level(local_hour: int, peak: float, trough: float) -> float:
    """Noise-free offered load: trough at hour 3, peak twelve hours later."""
    phase = 2.0 * math.pi * (local_hour - TROUGH_HOUR) / 24.0
    return trough + (peak - trough) * (1.0 - math.cos(phase)) / 2.0


def _tx_power(cfg: SimConfig, dl_prb: float, noise: float) -> float:
    nominal = cfg.tx_power_active_w * (1.0 - cfg.tx_power_load_backoff * (1.0 - dl_prb / 100.0))
    return _clip(nominal + cfg.tx_power_noise_std * noise, 0.0, cfg.tx_power_active_w)


def _throughput(cfg: SimConfig, dl_prb: float, noise: float) -> float:
    return max(0.0, cfg.throughput_intercept + cfg.throughput_slope * dl_prb + cfg.throughput_noise_std * noise)


def simulate(config: SimConfig) -> SectorTrace:
    """Generate an hourly trace; identical configs give identical traces."""
    cfg = config
    rng = SplitMix64(cfg.seed)
    n = cfg.hours
    timestamps = [cfg.start_epoch_hour + h for h in range(n)]

    cols = {role: {k: [] for k in KPI_NAMES} for role in ("coverage", "capacity")}
    offered = {k: [] for k in ("coverage_dl", "coverage_ul", "capacity_dl", "capacity_ul", "capacity_users")}
    mask = []

    for ts in timestamps:
        noise = {name: rng.normal() for name in NOISE_ORDER}
        local = ts % 24

        def load(cell, link):
            base = diurnal_level(local, getattr(cfg, f"{cell}_{link}_peak"), getattr(cfg, f"{cell}_{link}_trough"))
            return _clip(base + cfg.noise_std * noise[f"{cell}_{link}"], 0.0, 100.0)

        cov_dl, cov_ul = load("coverage", "dl"), load("coverage", "ul")
        cap_dl, cap_ul = load("capacity", "dl"), load("capacity", "ul")
        cap_users = _round_half_up(cfg.users_per_prb * cap_dl)
        off = cfg.policy.triggers(cov_dl, cov_ul, cap_dl, cap_ul, cap_users)

        for key, val in zip(offered, (cov_dl, cov_ul, cap_dl, cap_ul, cap_users)):
            offered[key].append(val)
        mask.append(off)

        if off:
            cov_dl_now = min(100.0, cov_dl + cap_dl)
            cov_ul_now = min(100.0, cov_ul + cap_ul)
        else:
            cov_dl_now, cov_ul_now = cov_dl, cov_ul

        cov = cols["coverage"]
        cov["dl_prb"].append(cov_dl_now)
        cov["ul_prb"].append(cov_ul_now)
        cov["unavailable_time"].append(0.0)
        cov["max_dl_tx_power"].append(_tx_power(cfg, cov_dl_now, noise["coverage_tx_power"]))
        cov["throughput"].append(_throughput(cfg, cov_dl_now, noise["coverage_throughput"]))
        cov["avg_users"].append(_round_half_up(cfg.users_per_prb * cov_dl_now))

        cap = cols["capacity"]
        if off:
            cap["dl_prb"].append(0.0)
            cap["ul_prb"].append(0.0)
            cap["unavailable_time"].append(MINUTES_PER_HOUR)
            cap["max_dl_tx_power"].append(float(cfg.tx_power_shutdown_w))
            cap["throughput"].append(0.0)
            cap["avg_users"].append(0.0)
        else:
            cap["dl_prb"].append(cap_dl)
            cap["ul_prb"].append(cap_ul)
            cap["unavailable_time"].append(0.0)
            cap["max_dl_tx_power"].append(_tx_power(cfg, cap_dl, noise["capacity_tx_power"]))
            cap["throughput"].append(_throughput(cfg, cap_dl, noise["capacity_throughput"]))
            cap["avg_users"].append(cap_users)

    frames = {
        role: KpiFrame(
            role,
            timestamps,
            tuple(KpiColumn(k, cols[role][k], "PM", KPI_UNITS[k]) for k in KPI_NAMES),
        )
        for role in cols
    }
    offered_arrays = {}
    for key, vals in offered.items():
        arr = np.array(vals, dtype=np.float64)
        arr.flags.writeable = False
        offered_arrays[key] = arr
    mask_arr = np.array(mask, dtype=bool)
    mask_arr.flags.writeable = False
    return SectorTrace(frames["coverage"], frames["capacity"], mask_arr, offered_arrays, cfg)


def export(trace: SectorTrace, directory: str | Path) -> tuple[Path, Path]:
    """Write ``coverage.csv`` and ``capacity.csv`` into ``directory``."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create output directory {directory}: {exc}") from exc
    cov = save_csv(trace.coverage, directory / "coverage.csv")
    cap = save_csv(trace.capacity, directory / "capacity.csv")
    return cov, cap
