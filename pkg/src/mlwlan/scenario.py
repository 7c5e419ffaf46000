"""Random deployment generation: AP/station placement, band plan, traffic
profiles, and the assignment of capabilities and allocation policies.

Deployments are built in two steps so that experiment sweeps can vary the
policy mix without disturbing geometry or traffic:

1. :func:`generate_scenario` draws the layout and per-station traffic
   profiles from a seeded stream.
2. :func:`assign_policies` marks each BSS as multi-link or legacy
   single-link and picks its allocation policy, from an independent stream.

Scenarios are immutable; both functions are pure in (params, seed).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .config import RunConfig
from .errors import ScenarioError

# Sub-stream tags so geometry, policy assignment, and traffic draws never
# share RNG state (see also traffic.py).
_GEOMETRY_STREAM = 7
_POLICY_STREAM = 11


class NodeKind(enum.Enum):
    AP = "ap"
    STA = "sta"


class Capability(enum.Enum):
    MLO = "MLO"        # all interfaces usable concurrently
    MBSL = "MB-SL"     # multi-band radios, one link per station


class Policy(enum.Enum):
    SLCI = "SLCI"
    MCAA = "MCAA"
    MCAB = "MCAB"
    LEGACY = "MB-SL"

    @classmethod
    def from_name(cls, name: str) -> "Policy":
        for p in cls:
            if p.value == name or p.name == name:
                return p
        raise ValueError(f"unknown policy {name!r}")


class TrafficKind(enum.Enum):
    VIDEO = "video"
    DATA = "data"


@dataclass(frozen=True)
class Band:
    """One radio interface class: carrier, width and OFDM data subcarriers."""
    index: int
    label: str
    carrier_freq_ghz: float
    bandwidth_mhz: float
    data_subcarriers: int


def bands_from_config(cfg: RunConfig) -> tuple[Band, ...]:
    labels = {2: "2.4GHz", 5: "5GHz", 6: "6GHz"}
    out = []
    for i, (f, bw, sd) in enumerate(
            zip(cfg.carrier_freq_ghz, cfg.bandwidth_mhz, cfg.data_subcarriers)):
        label = labels.get(int(f), f"{f:g}GHz")
        out.append(Band(i, label, f, bw, sd))
    return tuple(out)


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    x: float
    y: float
    tx_power_dbm: float
    noise_figure_db: float


@dataclass(frozen=True)
class StationProfile:
    node: Node
    traffic_kind: TrafficKind
    load_mbps: float
    # Band pinned by a legacy single-link BSS; None for multi-link stations.
    assigned_band: Optional[int] = None


@dataclass(frozen=True)
class Bss:
    id: int
    ap: Node
    stations: tuple[StationProfile, ...]
    capability: Optional[Capability] = None
    policy: Optional[Policy] = None


@dataclass(frozen=True)
class Scenario:
    bsses: tuple[Bss, ...]
    area: tuple[float, float]
    seed: int

    @property
    def n_bss(self) -> int:
        return len(self.bsses)

    def stations(self):
        for bss in self.bsses:
            for sta in bss.stations:
                yield bss, sta

    def to_dict(self) -> dict:
        def node(n: Node) -> dict:
            return {"id": n.id, "kind": n.kind.value, "x": n.x, "y": n.y,
                    "tx_power_dbm": n.tx_power_dbm,
                    "noise_figure_db": n.noise_figure_db}

        return {
            "area": list(self.area),
            "seed": self.seed,
            "bsses": [
                {
                    "id": b.id,
                    "capability": b.capability.value if b.capability else None,
                    "policy": b.policy.value if b.policy else None,
                    "ap": node(b.ap),
                    "stations": [
                        {
                            "node": node(s.node),
                            "traffic_kind": s.traffic_kind.value,
                            "load_mbps": s.load_mbps,
                            "assigned_band": s.assigned_band,
                        }
                        for s in b.stations
                    ],
                }
                for b in self.bsses
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def scenario_from_dict(doc: dict) -> Scenario:
    def node(d: dict) -> Node:
        return Node(d["id"], NodeKind(d["kind"]), d["x"], d["y"],
                    d["tx_power_dbm"], d["noise_figure_db"])

    bsses = []
    for b in doc["bsses"]:
        stations = tuple(
            StationProfile(node(s["node"]), TrafficKind(s["traffic_kind"]),
                           s["load_mbps"], s["assigned_band"])
            for s in b["stations"])
        bsses.append(Bss(b["id"], node(b["ap"]), stations,
                         Capability(b["capability"]) if b["capability"] else None,
                         Policy(b["policy"]) if b["policy"] else None))
    return Scenario(tuple(bsses), tuple(doc["area"]), doc["seed"])


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _draw_ap_layout(cfg: RunConfig, seed: int) -> list[tuple[float, float]]:
    """Central AP fixed at the area center; the rest uniform over the area.

    The whole neighbor layout is redrawn whenever any AP pair ends up closer
    than the minimum separation.
    """
    w, h = cfg.area_m
    center = (w / 2.0, h / 2.0)
    n = cfg.n_bss
    if n == 1:
        return [center]
    rng = _rng(seed, _GEOMETRY_STREAM, 0)
    min_sep = cfg.min_ap_separation_m
    for _ in range(cfg.max_layout_attempts):
        xs = rng.uniform(0.0, w, size=n - 1)
        ys = rng.uniform(0.0, h, size=n - 1)
        px = np.concatenate(([center[0]], xs))
        py = np.concatenate(([center[1]], ys))
        dx = px[:, None] - px[None, :]
        dy = py[:, None] - py[None, :]
        d2 = dx * dx + dy * dy
        np.fill_diagonal(d2, np.inf)
        if d2.min() >= min_sep * min_sep:
            return list(zip(px.tolist(), py.tolist()))
    raise ScenarioError(
        f"no valid AP layout after {cfg.max_layout_attempts} attempts: "
        f"{n} APs with >= {min_sep} m separation do not fit in "
        f"{w:g}x{h:g} m")


def _place_station(rng: np.random.Generator, ap_xy: tuple[float, float],
                   cfg: RunConfig) -> tuple[float, float]:
    """Draw distance and angle from the serving AP, redrawing until the
    station lands inside the area rectangle."""
    w, h = cfg.area_m
    d_lo, d_hi = cfg.sta_distance_m
    for _ in range(cfg.max_layout_attempts):
        d = rng.uniform(d_lo, d_hi)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        x = ap_xy[0] + d * math.cos(theta)
        y = ap_xy[1] + d * math.sin(theta)
        if 0.0 <= x <= w and 0.0 <= y <= h:
            return x, y
    raise ScenarioError("could not place a station inside the area")


def generate_scenario(cfg: RunConfig, seed: int) -> Scenario:
    """Generate a deployment: geometry, station traffic kinds and loads.

    The central BSS (id 0) sits at the area center and serves a single
    video station; every other BSS serves a uniformly drawn number of data
    stations.  Capabilities and policies are left unset; apply
    :func:`assign_policies` before simulating.
    """
    ap_xy = _draw_ap_layout(cfg, seed)
    bsses = []
    next_node_id = cfg.n_bss
    for b, (ax, ay) in enumerate(ap_xy):
        rng = _rng(seed, _GEOMETRY_STREAM, 1, b)
        ap = Node(b, NodeKind.AP, ax, ay, cfg.ap_tx_power_dbm,
                  cfg.noise_figure_db)
        stations = []
        if b == 0:
            counts = [(TrafficKind.VIDEO, 1)]
        else:
            m = int(rng.integers(cfg.sta_count_min, cfg.sta_count_max + 1))
            counts = [(TrafficKind.DATA, m)]
        for kind, m in counts:
            lo, hi = (cfg.video_load_mbps if kind is TrafficKind.VIDEO
                      else cfg.data_load_mbps)
            for _ in range(m):
                x, y = _place_station(rng, (ax, ay), cfg)
                load = float(rng.uniform(lo, hi))
                node = Node(next_node_id, NodeKind.STA, x, y,
                            cfg.sta_tx_power_dbm, cfg.noise_figure_db)
                next_node_id += 1
                stations.append(StationProfile(node, kind, load))
        bsses.append(Bss(b, ap, tuple(stations)))
    return Scenario(tuple(bsses), tuple(cfg.area_m), seed)


def _mlo_count(fraction: float, n_neighbors: int) -> int:
    # Round half away from zero so the sweep compositions are count-exact.
    return min(n_neighbors, int(math.floor(fraction * n_neighbors + 0.5)))


def assign_policies(scenario: Scenario, central_policy: Policy,
                    mlo_fraction: float, seed: int) -> Scenario:
    """Return a new scenario with capabilities and policies assigned.

    The central BSS gets `central_policy` (Policy.LEGACY makes it a legacy
    multi-band single-link BSS).  Exactly round(mlo_fraction * (N - 1))
    neighbors become multi-link, chosen uniformly at random; multi-link
    neighbors run SLCI or MCAA with equal probability, the rest are legacy
    with each station pinned to a uniformly random band.

    All random draws happen in a fixed order that depends only on the
    scenario shape and `seed`, so sweeping `mlo_fraction` or the central
    policy leaves every other assignment unchanged (and the multi-link
    neighbor sets grow by inclusion as the fraction rises).
    """
    if not 0.0 <= mlo_fraction <= 1.0:
        raise ValueError("mlo_fraction must be in [0, 1]")
    rng = _rng(seed, _POLICY_STREAM)
    n = scenario.n_bss
    order = rng.permutation(n - 1) if n > 1 else np.empty(0, dtype=int)
    coins = rng.integers(0, 2, size=max(0, n - 1))
    band_count = 3
    per_station_band = {}
    for bss in scenario.bsses:
        for idx in range(len(bss.stations)):
            per_station_band[(bss.id, idx)] = int(rng.integers(0, band_count))

    k = _mlo_count(mlo_fraction, n - 1)
    mlo_neighbors = {int(order[i]) + 1 for i in range(k)}

    new_bsses = []
    for bss in scenario.bsses:
        if bss.id == 0:
            cap = Capability.MBSL if central_policy is Policy.LEGACY else Capability.MLO
            pol = central_policy
        elif bss.id in mlo_neighbors:
            cap = Capability.MLO
            pol = Policy.SLCI if coins[bss.id - 1] == 0 else Policy.MCAA
        else:
            cap = Capability.MBSL
            pol = Policy.LEGACY
        stations = tuple(
            replace(sta, assigned_band=(per_station_band[(bss.id, i)]
                                        if cap is Capability.MBSL else None))
            for i, sta in enumerate(bss.stations))
        new_bsses.append(replace(bss, capability=cap, policy=pol,
                                 stations=stations))
    return Scenario(tuple(new_bsses), scenario.area, scenario.seed)
