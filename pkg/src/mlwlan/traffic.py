"""Downlink flow generation.

Each video station carries one constant-bit-rate flow spanning the whole
run.  Each data station alternates exponentially distributed OFF and ON
periods; every ON period is a distinct flow at the station's load.  Flow
draws come from per-station sub-streams keyed by (seed, BSS id, station
index), so a station's timeline does not depend on how many other stations
exist.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .scenario import Scenario, TrafficKind

_TRAFFIC_STREAM = 13

ARRIVAL = "arrival"
DEPARTURE = "departure"


@dataclass
class Flow:
    """One unit of downlink traffic.

    `weights` is the per-band traffic split chosen by the serving AP's
    policy; it is populated by the engine at (re)allocation time and left
    None here.
    """
    id: int
    bss_id: int
    sta_id: int
    kind: TrafficKind
    load_mbps: float
    t_start: float
    t_end: float
    weights: Optional[tuple[float, ...]] = field(default=None, compare=False)


@dataclass(frozen=True)
class FlowSchedule:
    flows: tuple[Flow, ...]
    horizon: float
    # (time, ARRIVAL|DEPARTURE, flow_id), time-ordered, departures first on ties.
    events: tuple[tuple[float, str, int], ...]

    def digest(self) -> str:
        h = hashlib.sha256()
        for f in self.flows:
            h.update(repr((f.id, f.bss_id, f.sta_id, f.kind.value,
                           f.load_mbps, f.t_start, f.t_end)).encode())
        return h.hexdigest()[:16]


def _station_rng(seed: int, bss_id: int, sta_idx: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((seed, _TRAFFIC_STREAM, bss_id, sta_idx)))


def build_schedule(scenario: Scenario, horizon: float, seed: int, *,
                   t_on_s: float = 3.0, t_off_s: float = 1.0,
                   start_on: bool = False) -> FlowSchedule:
    """Generate all flows for a scenario over [0, horizon].

    Data stations start in the OFF state by default (first flow after an
    Exp(t_off_s) delay); ON periods that straddle the horizon are truncated.
    Deterministic for a given (scenario, seed).
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    flows: list[Flow] = []
    fid = 0
    for bss in scenario.bsses:
        for sta_idx, sta in enumerate(bss.stations):
            if sta.traffic_kind is TrafficKind.VIDEO:
                flows.append(Flow(fid, bss.id, sta.node.id, sta.traffic_kind,
                                  sta.load_mbps, 0.0, horizon))
                fid += 1
                continue
            rng = _station_rng(seed, bss.id, sta_idx)
            t = 0.0 if start_on else float(rng.exponential(t_off_s))
            while t < horizon:
                on = float(rng.exponential(t_on_s))
                t_end = min(t + on, horizon)
                if t_end > t:
                    flows.append(Flow(fid, bss.id, sta.node.id,
                                      sta.traffic_kind, sta.load_mbps,
                                      t, t_end))
                    fid += 1
                t = t + on + float(rng.exponential(t_off_s))
    events = []
    for f in flows:
        events.append((f.t_start, ARRIVAL, f.id))
        events.append((f.t_end, DEPARTURE, f.id))
    # Departures come before arrivals at equal times so freed airtime is
    # visible to the newly placed flow.
    order = {DEPARTURE: 0, ARRIVAL: 1}
    events.sort(key=lambda e: (e[0], order[e[1]], e[2]))
    return FlowSchedule(tuple(flows), horizon, tuple(events))


def schedule_to_csv(schedule: FlowSchedule, path: str,
                    header_comment: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["flow_id", "bss_id", "sta_id", "kind",
                         "load_mbps", "t_start", "t_end"])
        for f in schedule.flows:
            writer.writerow([f.id, f.bss_id, f.sta_id, f.kind.value,
                             f.load_mbps, f.t_start, f.t_end])
