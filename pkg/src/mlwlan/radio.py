"""Link abstraction: path loss, SNR, MCS selection, per-station enabled
interface sets and the per-band AP contention graph.

The propagation model is a dual-slope log-distance law with a configurable
reference loss, frequency slope, and breakpoint.  A link (or a channel at a
contending AP) is considered detectable when the received power clears the
clear-channel-assessment threshold.  The MCS is picked per link from an SNR
threshold table and fixed for the whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import RunConfig
from .errors import InvalidScenarioError
from .scenario import Band, Capability, Scenario, bands_from_config

# Bits per subcarrier and coding rate for MCS 0..11 (BPSK .. 1024-QAM 5/6).
MCS_BITS_PER_SYMBOL = (1, 2, 2, 4, 4, 6, 6, 6, 8, 8, 10, 10)
MCS_CODING_RATE = (1 / 2, 1 / 2, 3 / 4, 1 / 2, 3 / 4, 2 / 3,
                   3 / 4, 5 / 6, 3 / 4, 5 / 6, 3 / 4, 5 / 6)
OFDM_SYMBOL_US = 12.8  # DFT period; guard interval is added from config

THERMAL_NOISE_DBM_HZ = -174.0


def path_loss_db(distance_m: float, band: Band, cfg: RunConfig) -> float:
    """Dual-slope log-distance path loss in dB.

    Up to the breakpoint the loss grows with the configured distance slope;
    beyond it the steeper second slope applies.  Monotone non-decreasing in
    both distance and carrier frequency.
    """
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    bp = cfg.pl_breakpoint_m
    pl = (cfg.pl_ref_loss_db
          + cfg.pl_freq_slope * math.log10(band.carrier_freq_ghz / 2.4)
          + cfg.pl_dist_slope * math.log10(min(distance_m, bp)))
    if distance_m > bp:
        pl += cfg.pl_beyond_slope * math.log10(distance_m / bp)
    return pl


def rx_power_dbm(tx_power_dbm: float, distance_m: float, band: Band,
                 cfg: RunConfig) -> float:
    return tx_power_dbm + 2.0 * cfg.antenna_gain_db - path_loss_db(
        distance_m, band, cfg)


def noise_floor_dbm(bandwidth_mhz: float, noise_figure_db: float) -> float:
    if bandwidth_mhz <= 0:
        raise ValueError("bandwidth must be positive")
    return (THERMAL_NOISE_DBM_HZ
            + 10.0 * math.log10(bandwidth_mhz * 1e6)
            + noise_figure_db)


def snr_db(rx_dbm: float, bandwidth_mhz: float, noise_figure_db: float) -> float:
    return rx_dbm - noise_floor_dbm(bandwidth_mhz, noise_figure_db)


def phy_rate_mbps(mcs: int, band: Band, spatial_streams: int,
                  cfg: RunConfig) -> float:
    """Data rate of one MCS on one band: streams x subcarriers x bits x
    coding rate per OFDM symbol."""
    symbol_us = OFDM_SYMBOL_US + cfg.guard_interval_us
    bits = MCS_BITS_PER_SYMBOL[mcs] * MCS_CODING_RATE[mcs]
    return spatial_streams * band.data_subcarriers * bits / symbol_us


def select_mcs(snr: float, band: Band, spatial_streams: int,
               cfg: RunConfig) -> tuple[Optional[int], float]:
    """Highest MCS whose SNR threshold is met, with its PHY rate in Mbps.

    Returns (None, 0.0) when even MCS 0 is out of reach: the link is
    unusable despite possibly being detectable.
    """
    if spatial_streams < 1:
        raise ValueError("spatial_streams must be >= 1")
    mcs = None
    for i, thr in enumerate(cfg.mcs_snr_thresholds_db):
        if snr >= thr:
            mcs = i
    if mcs is None:
        return None, 0.0
    return mcs, phy_rate_mbps(mcs, band, spatial_streams, cfg)


@dataclass(frozen=True)
class LinkState:
    """Downlink state of (serving AP, station) on one band."""
    ap_id: int
    sta_id: int
    band: int
    rx_power_dbm: float
    snr_db: float
    mcs_index: Optional[int]
    phy_rate_mbps: float
    enabled: bool


class LinkTable:
    """All downlink states, indexed by (station id, band index)."""

    def __init__(self, states: dict[tuple[int, int], LinkState], n_bands: int):
        self._states = states
        self.n_bands = n_bands

    def __getitem__(self, key: tuple[int, int]) -> LinkState:
        return self._states[key]

    def states(self):
        return self._states.values()

    def enabled_mask(self, sta_id: int) -> tuple[bool, ...]:
        return tuple(self._states[(sta_id, b)].enabled
                     for b in range(self.n_bands))

    def rate(self, sta_id: int, band: int) -> float:
        return self._states[(sta_id, band)].phy_rate_mbps

    def to_rows(self) -> list[dict]:
        return [
            {"ap_id": s.ap_id, "sta_id": s.sta_id, "band": s.band,
             "rx_power_dbm": s.rx_power_dbm, "snr_db": s.snr_db,
             "mcs_index": s.mcs_index, "phy_rate_mbps": s.phy_rate_mbps,
             "enabled": s.enabled}
            for s in sorted(self._states.values(),
                            key=lambda s: (s.sta_id, s.band))
        ]


def build_link_states(scenario: Scenario, cfg: RunConfig) -> LinkTable:
    """Compute every (AP, own station, band) link state.

    A band is enabled when the AP is received above the CCA threshold and
    supports at least MCS 0; stations of legacy single-link BSSs keep only
    their pinned band.  A station with no enabled band at all violates the
    coverage assumption and raises InvalidScenarioError.
    """
    bands = bands_from_config(cfg)
    states: dict[tuple[int, int], LinkState] = {}
    for bss, sta in scenario.stations():
        dist = math.hypot(sta.node.x - bss.ap.x, sta.node.y - bss.ap.y)
        any_enabled = False
        for band in bands:
            rx = rx_power_dbm(bss.ap.tx_power_dbm, dist, band, cfg)
            snr = snr_db(rx, band.bandwidth_mhz, sta.node.noise_figure_db)
            mcs, rate = select_mcs(snr, band, cfg.spatial_streams, cfg)
            enabled = rx >= cfg.cca_threshold_dbm and mcs is not None
            if (bss.capability is Capability.MBSL
                    and sta.assigned_band is not None
                    and band.index != sta.assigned_band):
                enabled = False
            any_enabled = any_enabled or enabled
            states[(sta.node.id, band.index)] = LinkState(
                bss.ap.id, sta.node.id, band.index, rx, snr, mcs, rate, enabled)
        if not any_enabled:
            raise InvalidScenarioError(
                f"station {sta.node.id} (BSS {bss.id}) has no enabled "
                f"interface at distance {dist:.2f} m")
    return LinkTable(states, len(bands))


@dataclass(frozen=True)
class ContentionGraph:
    """Symmetric, irreflexive AP adjacency on one band: an edge means the
    two APs detect each other and must share the channel."""
    band: int
    adjacency: np.ndarray  # (n_aps, n_aps) bool

    @property
    def n_aps(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, ap_id: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adjacency[ap_id])]


def build_contention_graphs(scenario: Scenario,
                            cfg: RunConfig) -> list[ContentionGraph]:
    """One contention graph per band from AP-to-AP received power."""
    bands = bands_from_config(cfg)
    aps = [bss.ap for bss in scenario.bsses]
    n = len(aps)
    graphs = []
    for band in bands:
        adj = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                dist = math.hypot(aps[i].x - aps[j].x, aps[i].y - aps[j].y)
                rx = rx_power_dbm(aps[j].tx_power_dbm, dist, band, cfg)
                if rx >= cfg.cca_threshold_dbm:
                    adj[i, j] = adj[j, i] = True
        graphs.append(ContentionGraph(band.index, adj))
    return graphs
