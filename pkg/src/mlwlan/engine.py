"""Event-driven simulation loop.

Between events the network allocation is constant, so per-flow airtime
integrals accumulate in closed form over each epoch.  Three event kinds
exist: flow departures, flow arrivals, and the periodic reallocation
timers of dynamic-policy APs.  At equal timestamps departures are applied
first (freed airtime is visible to new placements), then arrivals, then
timers.

A run is strictly single-threaded and bit-reproducible: the event list is
fully determined by the schedule and the timer grid, per-AP demand totals
use exact summation, and policies are deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .airtime import band_scalings, flow_airtime, maximal_cliques
from .config import RunConfig, config_hash
from .errors import ConfigError
from .policy import (McabFlow, PolicyInput, legacy_assign, mcaa,
                     mcab_reallocate, slci)
from .radio import build_contention_graphs, build_link_states
from .scenario import Policy, Scenario, TrafficKind
from .traffic import ARRIVAL, DEPARTURE, FlowSchedule

MCAB_TICK = "mcab_tick"

# Tie order at equal event times.
_PRIORITY = {DEPARTURE: 0, ARRIVAL: 1, MCAB_TICK: 2}


def mcab_tick_schedule(ap_id: int, delta: float, horizon: float,
                       phase: float = 0.0) -> list[tuple[float, str, int]]:
    """Timer events for one dynamic-policy AP: phase + k*delta up to and
    including the horizon (phase 0 means the first tick is at delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    ticks = []
    k = 1 if phase == 0.0 else 0
    while True:
        t = phase + k * delta
        if t > horizon + 1e-9:
            break
        if t > 0.0:
            ticks.append((min(t, horizon), MCAB_TICK, ap_id))
        k += 1
    return ticks


def integrate_epoch(demands: dict[int, tuple[float, ...]],
                    scalings: dict[int, tuple[float, ...]],
                    t0: float, t1: float) -> dict[int, tuple[float, float]]:
    """Reference epoch integration: per-flow (required, allocated) deltas
    over [t0, t1] given constant demands and per-flow scaling factors.

    The engine accumulates the same quantities incrementally; this function
    is the simple form used by tests and oracles.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    dt = t1 - t0
    out = {}
    for fid, dem in demands.items():
        s = scalings[fid]
        req = sum(dem) * dt
        alloc = sum(d * si for d, si in zip(dem, s)) * dt
        out[fid] = (req, alloc)
    return out


@dataclass
class FlowRecord:
    flow_id: int
    bss_id: int
    sta_id: int
    kind: str
    load_mbps: float
    t_start: float
    t_end: float
    required_airtime: float
    allocated_airtime: float
    satisfaction: float
    final_weights: Optional[tuple[float, ...]]


@dataclass
class SimResult:
    horizon: float
    seed: int
    config_digest: str
    flow_records: list[FlowRecord]
    station_satisfaction: dict[int, float]
    bss_satisfaction: dict[int, float]
    # (ap, band) -> [(time, occupancy), ...]; empty unless recording was on.
    congestion: dict[tuple[int, int], list[tuple[float, float]]]
    event_counts: dict[str, int]
    # optional debug capture: [(time, {(ap, band, flow): alloc})]
    allocation_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "config_hash": self.config_digest,
            "seed": self.seed,
            "horizon_s": self.horizon,
            "event_counts": self.event_counts,
            "bss_satisfaction": {str(k): v
                                 for k, v in sorted(self.bss_satisfaction.items())},
            "station_satisfaction": {str(k): v for k, v
                                     in sorted(self.station_satisfaction.items())},
            "flows": [vars(r) | {"final_weights":
                                 list(r.final_weights) if r.final_weights else None}
                      for r in self.flow_records],
        }

    def canonical_json(self) -> str:
        doc = self.to_dict()
        doc["congestion"] = {f"{ap},{band}": pts for (ap, band), pts
                             in sorted(self.congestion.items())}
        return json.dumps(doc, sort_keys=True)


class _FlowRt:
    """Mutable runtime state of one flow."""
    __slots__ = ("flow", "ap", "enabled", "unit", "weights", "demand",
                 "seg_start", "snap", "required", "allocated", "active")

    def __init__(self, flow, ap, enabled, unit):
        self.flow = flow
        self.ap = ap
        self.enabled = enabled
        self.unit = unit
        self.weights = None
        self.demand = (0.0, 0.0, 0.0)
        self.seg_start = 0.0
        self.snap = None
        self.required = 0.0
        self.allocated = 0.0
        self.active = False


class _Sim:
    def __init__(self, scenario: Scenario, schedule: FlowSchedule,
                 cfg: RunConfig, seed: int, record_allocations: bool):
        self.scenario = scenario
        self.cfg = cfg
        self.seed = seed
        self.horizon = schedule.horizon
        self.record_allocations = record_allocations

        for bss in scenario.bsses:
            if bss.policy is None or bss.capability is None:
                raise ConfigError(f"BSS {bss.id} has no policy assigned; "
                                  "run assign_policies first")
        sta_to_bss = {sta.node.id: bss.id for bss, sta in scenario.stations()}
        for f in schedule.flows:
            if sta_to_bss.get(f.sta_id) != f.bss_id:
                raise ConfigError(
                    f"flow {f.id}: station {f.sta_id} does not belong to "
                    f"BSS {f.bss_id} in this scenario")

        self.links = build_link_states(scenario, cfg)
        graphs = build_contention_graphs(scenario, cfg)
        self.n_aps = scenario.n_bss
        self.n_bands = self.links.n_bands
        self.adj = [g.adjacency.astype(float) for g in graphs]
        self.cliques = [maximal_cliques(g) for g in graphs]
        self.policies = [bss.policy for bss in scenario.bsses]

        self.flows: dict[int, _FlowRt] = {}
        for f in schedule.flows:
            enabled = self.links.enabled_mask(f.sta_id)
            unit = tuple(
                flow_airtime(f.load_mbps, self.links.rate(f.sta_id, b),
                             cfg.mac_efficiency, cfg.packet_error_rate)
                if enabled[b] else 0.0
                for b in range(self.n_bands))
            self.flows[f.id] = _FlowRt(f, f.bss_id, enabled, unit)

        self.ap_flow_ids: list[set[int]] = [set() for _ in range(self.n_aps)]
        shape = (self.n_aps, self.n_bands)
        self.D = np.zeros(shape)
        self.s = np.ones(shape)
        self.alloc_tot = np.zeros(shape)
        self.busy_raw = np.zeros(shape)
        self.occupancy = np.zeros(shape)
        self.rho = np.ones(shape)
        self.integral_s = np.zeros(shape)
        self.t_last = 0.0

        self.events = self._build_events(schedule)
        self.event_counts = {ARRIVAL: 0, DEPARTURE: 0, MCAB_TICK: 0}

        self.recording = cfg.record_congestion
        self.series: dict[tuple[int, int], list[tuple[float, float]]] = {}
        if self.recording:
            for ap in range(self.n_aps):
                for b in range(self.n_bands):
                    self.series[(ap, b)] = [(0.0, 0.0)]
        self.allocation_trace: list = []

    # -- event plumbing ---------------------------------------------------

    def _build_events(self, schedule: FlowSchedule):
        events = [(t, kind, key) for (t, kind, key) in schedule.events]
        rng = np.random.default_rng(
            np.random.SeedSequence((self.seed, 17)))
        for ap in range(self.n_aps):
            if self.policies[ap] is Policy.MCAB:
                phase = (float(rng.uniform(0.0, self.cfg.mcab_delta_s))
                         if self.cfg.mcab_random_phase else 0.0)
                events.extend(mcab_tick_schedule(
                    ap, self.cfg.mcab_delta_s, self.horizon, phase))
        events.sort(key=lambda e: (e[0], _PRIORITY[e[1]], e[2]))
        return events

    def _integrate_to(self, t: float) -> None:
        dt = t - self.t_last
        if dt > 0.0:
            self.integral_s += self.s * dt
            self.t_last = t

    def _settle(self, rt: _FlowRt, t: float) -> None:
        # Accumulate required/allocated airtime for the segment ending at t.
        d_int = self.integral_s[rt.ap] - rt.snap
        req = 0.0
        alloc = 0.0
        for b in range(self.n_bands):
            dem = rt.demand[b]
            if dem > 0.0:
                req += dem * (t - rt.seg_start)
                alloc += dem * float(d_int[b])
        rt.required += req
        rt.allocated += alloc
        rt.seg_start = t
        rt.snap = self.integral_s[rt.ap].copy()

    def _rebuild_demand(self, ap: int) -> None:
        ids = sorted(self.ap_flow_ids[ap])
        for b in range(self.n_bands):
            # fsum keeps totals independent of flow insertion order
            self.D[ap, b] = math.fsum(self.flows[i].demand[b] for i in ids)

    def _resolve(self, bands) -> None:
        for b in bands:
            tot = self.D[:, b]
            s = band_scalings(tot, self.cliques[b])
            self.s[:, b] = s
            at = tot * s
            self.alloc_tot[:, b] = at
            self.busy_raw[:, b] = at + self.adj[b] @ at
        np.minimum(self.busy_raw, 1.0, out=self.occupancy)
        np.subtract(1.0, self.occupancy, out=self.rho)

    def _record(self, t: float) -> None:
        if self.recording:
            for ap in range(self.n_aps):
                for b in range(self.n_bands):
                    series = self.series[(ap, b)]
                    occ = float(self.occupancy[ap, b])
                    if occ != series[-1][1]:
                        if series[-1][0] == t:
                            series[-1] = (t, occ)
                        else:
                            series.append((t, occ))
        if self.record_allocations:
            snap = {}
            for ap in range(self.n_aps):
                for fid in self.ap_flow_ids[ap]:
                    rt = self.flows[fid]
                    for b in range(self.n_bands):
                        if rt.demand[b] > 0.0:
                            snap[(ap, b, fid)] = rt.demand[b] * float(self.s[ap, b])
            self.allocation_trace.append((t, snap))

    # -- policy invocation -------------------------------------------------

    def _place_new_flow(self, rt: _FlowRt, t: float) -> None:
        policy = self.policies[rt.ap]
        rho = tuple(float(x) for x in self.rho[rt.ap])
        inp = PolicyInput(rt.enabled, rho, arrival_time=t, flow_id=rt.flow.id)
        if policy is Policy.SLCI:
            weights = slci(inp)
        elif policy is Policy.MCAA:
            weights = mcaa(inp)
        elif policy is Policy.LEGACY:
            weights = legacy_assign(inp, self._assigned_band(rt))
        else:
            raise AssertionError("MCAB arrivals go through _reallocate")
        self._set_weights(rt, weights, t)

    def _assigned_band(self, rt: _FlowRt) -> int:
        bss = self.scenario.bsses[rt.flow.bss_id]
        for sta in bss.stations:
            if sta.node.id == rt.flow.sta_id:
                if sta.assigned_band is None:
                    raise ConfigError(
                        f"station {sta.node.id} of legacy BSS {bss.id} "
                        "has no assigned band")
                return sta.assigned_band
        raise ConfigError(f"station {rt.flow.sta_id} not found")

    def _set_weights(self, rt: _FlowRt, weights: tuple[float, ...],
                     t: float) -> None:
        rt.weights = weights
        rt.demand = tuple(w * u for w, u in zip(weights, rt.unit))
        rt.seg_start = t
        rt.snap = self.integral_s[rt.ap].copy()

    def _reallocate(self, ap: int, t: float) -> None:
        ids = sorted(self.ap_flow_ids[ap])
        if not ids:
            return
        for fid in ids:
            rt = self.flows[fid]
            if rt.snap is not None:
                self._settle(rt, t)
        base_busy = self.busy_raw[ap] - self.alloc_tot[ap]
        base_free = tuple(max(0.0, 1.0 - float(b)) for b in base_busy)
        infos = [McabFlow(fid, self.flows[fid].enabled,
                          self.flows[fid].flow.t_start,
                          self.flows[fid].unit)
                 for fid in ids]
        assignment = mcab_reallocate(infos, base_free)
        for fid in ids:
            self._set_weights(self.flows[fid], assignment[fid], t)
        self._rebuild_demand(ap)
        self._resolve(range(self.n_bands))

    # -- main loop ----------------------------------------------------------

    def run(self) -> SimResult:
        for (t, kind, key) in self.events:
            self._integrate_to(t)
            self.event_counts[kind] += 1
            if kind == DEPARTURE:
                rt = self.flows[key]
                if rt.active:
                    self._settle(rt, t)
                    rt.active = False
                    self.ap_flow_ids[rt.ap].discard(key)
                    self._rebuild_demand(rt.ap)
                    self._resolve([b for b in range(self.n_bands)
                                   if rt.demand[b] > 0.0])
            elif kind == ARRIVAL:
                rt = self.flows[key]
                rt.active = True
                self.ap_flow_ids[rt.ap].add(key)
                if self.policies[rt.ap] is Policy.MCAB:
                    rt.snap = None  # placed by the reallocation below
                    self._reallocate(rt.ap, t)
                else:
                    self._place_new_flow(rt, t)
                    self._rebuild_demand(rt.ap)
                    self._resolve([b for b in range(self.n_bands)
                                   if rt.demand[b] > 0.0])
            else:  # MCAB_TICK
                self._reallocate(key, t)
            self._record(t)
        self._integrate_to(self.horizon)
        for rt in self.flows.values():
            if rt.active:
                self._settle(rt, self.horizon)
                rt.active = False
        return self._result()

    def _result(self) -> SimResult:
        records = []
        by_station: dict[int, list[_FlowRt]] = {}
        for fid in sorted(self.flows):
            rt = self.flows[fid]
            sat = 1.0 if rt.required <= 0.0 else min(1.0, rt.allocated / rt.required)
            f = rt.flow
            records.append(FlowRecord(
                f.id, f.bss_id, f.sta_id, f.kind.value, f.load_mbps,
                f.t_start, f.t_end, rt.required, rt.allocated, sat,
                rt.weights))
            by_station.setdefault(f.sta_id, []).append(rt)
        station_sat: dict[int, float] = {}
        bss_sat: dict[int, float] = {}
        for bss in self.scenario.bsses:
            sats = []
            for sta in bss.stations:
                rts = by_station.get(sta.node.id, [])
                req = sum(rt.required for rt in rts)
                alloc = sum(rt.allocated for rt in rts)
                sat = 1.0 if req <= 0.0 else min(1.0, alloc / req)
                station_sat[sta.node.id] = sat
                sats.append(sat)
            bss_sat[bss.id] = sum(sats) / len(sats) if sats else 1.0
        return SimResult(
            horizon=self.horizon,
            seed=self.seed,
            config_digest=config_hash(self.cfg),
            flow_records=records,
            station_satisfaction=station_sat,
            bss_satisfaction=bss_sat,
            congestion=self.series,
            event_counts=dict(self.event_counts),
            allocation_trace=self.allocation_trace,
        )


def run(scenario: Scenario, schedule: FlowSchedule, cfg: RunConfig,
        seed: int = 0, record_allocations: bool = False) -> SimResult:
    """Simulate one scenario against one flow schedule.

    `seed` only matters when optional randomized features (timer phase) are
    enabled; the run is otherwise a pure function of its inputs.
    """
    sim = _Sim(scenario, schedule, cfg, seed, record_allocations)
    return sim.run()


def flows_csv(result: SimResult, path: str, header_comment: str = "") -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["flow_id", "bss_id", "sta_id", "kind", "load_mbps",
                    "t_start", "t_end", "required_airtime",
                    "allocated_airtime", "satisfaction"])
        for r in result.flow_records:
            w.writerow([r.flow_id, r.bss_id, r.sta_id, r.kind, r.load_mbps,
                        r.t_start, r.t_end, r.required_airtime,
                        r.allocated_airtime, r.satisfaction])


def congestion_csv(result: SimResult, path: str,
                   header_comment: str = "") -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["ap", "band", "time", "occupancy"])
        for (ap, band) in sorted(result.congestion):
            for (t, occ) in result.congestion[(ap, band)]:
                w.writerow([ap, band, t, occ])
