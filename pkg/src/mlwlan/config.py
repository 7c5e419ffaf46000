"""Run configuration and the flat dotted-key config file format.

A config file is plain text, one ``key = value`` assignment per line.
Keys are dotted (``radio.cca_threshold_dbm``), values are JSON literals
(numbers, booleans, strings, or lists).  ``#`` starts a comment.  Every
key is optional; omitted keys keep their defaults, which reproduce the
standard evaluation setup of this simulator.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields, replace
from typing import Any

from .errors import ConfigError

VALID_POLICIES = ("SLCI", "MCAA", "MCAB", "MB-SL")


@dataclass(frozen=True)
class RunConfig:
    """All simulation parameters with their default evaluation values."""

    # Band plan: one entry per interface, lowest band first.
    carrier_freq_ghz: tuple = (2.437, 5.230, 6.295)
    bandwidth_mhz: tuple = (20.0, 40.0, 80.0)
    data_subcarriers: tuple = (234, 468, 980)

    # Radio front end.
    ap_tx_power_dbm: float = 20.0
    sta_tx_power_dbm: float = 15.0
    antenna_gain_db: float = 0.0
    cca_threshold_dbm: float = -82.0
    noise_figure_db: float = 7.0
    spatial_streams: int = 2
    guard_interval_us: float = 0.8
    # SNR (dB) required for MCS 0..11; link-abstraction defaults.
    mcs_snr_thresholds_db: tuple = (2.0, 5.0, 8.0, 11.0, 15.0, 19.0, 21.0,
                                    23.0, 27.0, 29.0, 31.0, 33.0)

    # Dual-slope log-distance path loss.
    pl_ref_loss_db: float = 40.05
    pl_freq_slope: float = 20.0
    pl_dist_slope: float = 20.0
    pl_breakpoint_m: float = 5.0
    pl_beyond_slope: float = 35.0

    # MAC / airtime abstraction.
    mpdu_bytes: int = 1500
    # Fraction of PHY rate left after per-access MAC overhead.  The default
    # corresponds to one MPDU per channel access at high MCS (no frame
    # aggregation); see README for the calibration notes.
    mac_efficiency: float = 0.85
    packet_error_rate: float = 0.10

    # Traffic model.
    t_on_s: float = 3.0
    t_off_s: float = 1.0
    data_start_on: bool = False
    horizon_s: float = 120.0

    # Dynamic-policy timer.
    mcab_delta_s: float = 1.0
    mcab_random_phase: bool = False

    # Scenario geometry.
    n_bss: int = 5
    area_m: tuple = (20.0, 20.0)
    sta_count_min: int = 5
    sta_count_max: int = 15
    video_load_mbps: tuple = (20.0, 25.0)
    data_load_mbps: tuple = (1.0, 3.0)
    min_ap_separation_m: float = 3.0
    sta_distance_m: tuple = (1.0, 5.0)
    max_layout_attempts: int = 10000

    # Experiment orchestration.
    central_policy: str = "MCAB"
    mlo_fraction: float = 1.0
    satisfaction_threshold: float = 0.95
    ns_satisfaction: int = 500
    ns_coexistence: int = 200
    coex_fractions: tuple = (0.0, 0.3, 0.7, 1.0)
    base_seed: int = 1

    # Output control.
    record_congestion: bool = True


# Dotted config key -> dataclass field.
_KEYS = {
    "bands.carrier_freq_ghz": "carrier_freq_ghz",
    "bands.bandwidth_mhz": "bandwidth_mhz",
    "bands.data_subcarriers": "data_subcarriers",
    "radio.ap_tx_power_dbm": "ap_tx_power_dbm",
    "radio.sta_tx_power_dbm": "sta_tx_power_dbm",
    "radio.antenna_gain_db": "antenna_gain_db",
    "radio.cca_threshold_dbm": "cca_threshold_dbm",
    "radio.noise_figure_db": "noise_figure_db",
    "radio.spatial_streams": "spatial_streams",
    "radio.guard_interval_us": "guard_interval_us",
    "radio.mcs_snr_thresholds_db": "mcs_snr_thresholds_db",
    "pathloss.ref_loss_db": "pl_ref_loss_db",
    "pathloss.freq_slope": "pl_freq_slope",
    "pathloss.dist_slope": "pl_dist_slope",
    "pathloss.breakpoint_m": "pl_breakpoint_m",
    "pathloss.beyond_breakpoint_slope": "pl_beyond_slope",
    "mac.mpdu_bytes": "mpdu_bytes",
    "mac.efficiency": "mac_efficiency",
    "mac.packet_error_rate": "packet_error_rate",
    "traffic.t_on_s": "t_on_s",
    "traffic.t_off_s": "t_off_s",
    "traffic.data_start_on": "data_start_on",
    "traffic.horizon_s": "horizon_s",
    "mcab.delta_s": "mcab_delta_s",
    "mcab.random_phase": "mcab_random_phase",
    "scenario.n_bss": "n_bss",
    "scenario.area_m": "area_m",
    "scenario.sta_count_min": "sta_count_min",
    "scenario.sta_count_max": "sta_count_max",
    "scenario.video_load_mbps": "video_load_mbps",
    "scenario.data_load_mbps": "data_load_mbps",
    "scenario.min_ap_separation_m": "min_ap_separation_m",
    "scenario.sta_distance_m": "sta_distance_m",
    "scenario.max_layout_attempts": "max_layout_attempts",
    "policy.central": "central_policy",
    "policy.mlo_fraction": "mlo_fraction",
    "metrics.satisfaction_threshold": "satisfaction_threshold",
    "experiment.ns_satisfaction": "ns_satisfaction",
    "experiment.ns_coexistence": "ns_coexistence",
    "experiment.coex_fractions": "coex_fractions",
    "experiment.base_seed": "base_seed",
    "output.record_congestion": "record_congestion",
}

_FIELD_TO_KEY = {f: k for k, f in _KEYS.items()}


def _coerce(key: str, raw: Any, template: Any) -> Any:
    if isinstance(template, tuple):
        if not isinstance(raw, list):
            raise ConfigError(f"key '{key}': expected a list, got {raw!r}")
        return tuple(raw)
    if isinstance(template, bool):
        if not isinstance(raw, bool):
            raise ConfigError(f"key '{key}': expected a boolean, got {raw!r}")
        return raw
    if isinstance(template, int) and not isinstance(template, bool):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"key '{key}': expected a number, got {raw!r}")
        if float(raw) != int(raw):
            raise ConfigError(f"key '{key}': expected an integer, got {raw!r}")
        return int(raw)
    if isinstance(template, float):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"key '{key}': expected a number, got {raw!r}")
        return float(raw)
    if isinstance(template, str):
        if not isinstance(raw, str):
            raise ConfigError(f"key '{key}': expected a string, got {raw!r}")
        return raw
    raise ConfigError(f"key '{key}': unsupported value {raw!r}")


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config text into a RunConfig, starting from `base` or defaults."""
    cfg = base or RunConfig()
    overrides: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value_text = stripped.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        try:
            raw = json.loads(value_text)
        except json.JSONDecodeError:
            # Bare words are treated as strings (policy names etc.).
            raw = value_text
        field_name = _KEYS[key]
        template = getattr(cfg, field_name)
        try:
            overrides[field_name] = _coerce(key, raw, template)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    out = replace(cfg, **overrides)
    validate_config(out)
    return out


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)


def dump_config_text(cfg: RunConfig) -> str:
    """Render a config as canonical flat-key text (defaults file format)."""
    lines = ["# mlwlan run configuration (flat dotted keys, JSON values)"]
    section = None
    for f in fields(RunConfig):
        key = _FIELD_TO_KEY[f.name]
        sec = key.split(".", 1)[0]
        if sec != section:
            lines.append("")
            lines.append(f"# [{sec}]")
            section = sec
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            rendered = json.dumps(list(value))
        else:
            rendered = json.dumps(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    """Stable short hash of the fully resolved configuration."""
    return hashlib.sha256(dump_config_text(cfg).encode()).hexdigest()[:12]


def validate_config(cfg: RunConfig) -> None:
    """Raise ConfigError naming the offending field(s) if cfg is inconsistent."""
    problems = []
    nb = len(cfg.carrier_freq_ghz)
    if nb == 0:
        problems.append("bands.carrier_freq_ghz: at least one band required")
    if len(cfg.bandwidth_mhz) != nb or len(cfg.data_subcarriers) != nb:
        problems.append("bands.*: carrier_freq_ghz, bandwidth_mhz and "
                        "data_subcarriers must have equal length")
    if any(f <= 0 for f in cfg.carrier_freq_ghz):
        problems.append("bands.carrier_freq_ghz: frequencies must be positive")
    if list(cfg.carrier_freq_ghz) != sorted(cfg.carrier_freq_ghz):
        problems.append("bands.carrier_freq_ghz: must be ascending")
    if any(b <= 0 for b in cfg.bandwidth_mhz):
        problems.append("bands.bandwidth_mhz: bandwidths must be positive")
    if len(cfg.mcs_snr_thresholds_db) != 12:
        problems.append("radio.mcs_snr_thresholds_db: exactly 12 thresholds required")
    elif list(cfg.mcs_snr_thresholds_db) != sorted(cfg.mcs_snr_thresholds_db):
        problems.append("radio.mcs_snr_thresholds_db: must be non-decreasing")
    if cfg.spatial_streams < 1:
        problems.append("radio.spatial_streams: must be >= 1")
    if not 0 < cfg.mac_efficiency <= 1:
        problems.append("mac.efficiency: must be in (0, 1]")
    if not 0 <= cfg.packet_error_rate < 1:
        problems.append("mac.packet_error_rate: must be in [0, 1)")
    if cfg.t_on_s <= 0 or cfg.t_off_s <= 0:
        problems.append("traffic.t_on_s/t_off_s: must be positive")
    if cfg.horizon_s <= 0:
        problems.append("traffic.horizon_s: must be positive")
    if cfg.mcab_delta_s <= 0:
        problems.append("mcab.delta_s: must be positive")
    if cfg.n_bss < 1:
        problems.append("scenario.n_bss: must be >= 1")
    if len(cfg.area_m) != 2 or any(a <= 0 for a in cfg.area_m):
        problems.append("scenario.area_m: expected two positive dimensions")
    if cfg.sta_count_min < 1 or cfg.sta_count_max < cfg.sta_count_min:
        problems.append("scenario.sta_count_min/max: need 1 <= min <= max")
    for name in ("video_load_mbps", "data_load_mbps", "sta_distance_m"):
        rng = getattr(cfg, name)
        if len(rng) != 2 or rng[0] <= 0 or rng[1] < rng[0]:
            problems.append(f"scenario.{name}: expected [lo, hi] with 0 < lo <= hi")
    if cfg.min_ap_separation_m < 0:
        problems.append("scenario.min_ap_separation_m: must be >= 0")
    if cfg.max_layout_attempts < 1:
        problems.append("scenario.max_layout_attempts: must be >= 1")
    if cfg.central_policy not in VALID_POLICIES:
        problems.append(f"policy.central: must be one of {', '.join(VALID_POLICIES)}")
    if not 0 <= cfg.mlo_fraction <= 1:
        problems.append("policy.mlo_fraction: must be in [0, 1]")
    if not 0 <= cfg.satisfaction_threshold <= 1:
        problems.append("metrics.satisfaction_threshold: must be in [0, 1]")
    if cfg.ns_satisfaction < 1 or cfg.ns_coexistence < 1:
        problems.append("experiment.ns_*: must be >= 1")
    if any(not 0 <= f <= 1 for f in cfg.coex_fractions):
        problems.append("experiment.coex_fractions: fractions must be in [0, 1]")
    if cfg.base_seed < 0:
        problems.append("experiment.base_seed: must be >= 0")
    if problems:
        raise ConfigError("; ".join(problems))
