"""Channel-occupancy abstraction.

Flow loads and per-band weights translate into demanded airtime fractions
at each (AP, band).  Contention between APs that detect each other is
resolved by proportional scaling over the maximal cliques of the per-band
contention graph: within every clique the total allocated airtime cannot
exceed one second per second, and when demand exceeds that, every AP in the
clique keeps the same fraction of its demand.  This preserves the equal
long-run channel split CSMA/CA converges to while staying deterministic
and independent of flow ordering.

An AP's observed occupancy is the airtime allocated by itself and its
one-hop contention neighbors, clipped at 1; the complement is the free
airtime the allocation policies act on.

A max-min variant of the overload rule would slot in behind the same
interface (replace :func:`band_scalings`); only the proportional rule is
implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .radio import ContentionGraph

FEASIBILITY_TOL = 1e-9


def flow_airtime(load_share_mbps: float, phy_rate_mbps: float,
                 mac_efficiency: float, per: float) -> float:
    """Airtime fraction needed to carry `load_share_mbps` on one band.

    The PHY rate is derated by the MAC efficiency, and lost transmissions
    (probability `per`) are retransmitted, inflating the share by
    1 / (1 - per).
    """
    if load_share_mbps < 0:
        raise ValueError("load must be non-negative")
    if phy_rate_mbps <= 0:
        raise ValueError("phy rate must be positive")
    if not 0 < mac_efficiency <= 1:
        raise ValueError("mac_efficiency must be in (0, 1]")
    if not 0 <= per < 1:
        raise ValueError("per must be in [0, 1)")
    return load_share_mbps / (phy_rate_mbps * mac_efficiency * (1.0 - per))


@dataclass(frozen=True)
class AirtimeDemand:
    """Demanded airtime at one (AP, band), broken down per flow."""
    ap_id: int
    band: int
    per_flow: dict[int, float] = field(default_factory=dict)

    def total(self) -> float:
        return math.fsum(self.per_flow[k] for k in sorted(self.per_flow))


@dataclass(frozen=True)
class AirtimeSolution:
    """Feasible allocation plus the occupancy each AP observes."""
    # (ap_id, band, flow_id) -> allocated airtime fraction
    alloc: dict[tuple[int, int, int], float]
    # (ap_id, band) -> busy fraction seen at that AP, clipped to [0, 1]
    occupancy: dict[tuple[int, int], float]
    # (ap_id, band) -> free fraction, max(0, 1 - occupancy)
    free: dict[tuple[int, int], float]
    # (ap_id, band) -> {flow_id: alloc} for all flows the AP observes
    # (its own and its one-hop neighbors'); backs residual_free().
    observed: dict[tuple[int, int], dict[int, float]]


def maximal_cliques(graph: ContentionGraph) -> list[list[int]]:
    """Maximal cliques of the contention graph, isolated APs included."""
    g = nx.from_numpy_array(graph.adjacency)
    return [sorted(c) for c in nx.find_cliques(g)]


def band_scalings(totals: np.ndarray, cliques: list[list[int]]) -> np.ndarray:
    """Per-AP demand scaling factors for one band.

    `totals[a]` is AP a's demanded airtime.  Each AP keeps the most
    restrictive factor among its cliques: 1 when the clique fits, else the
    inverse of the clique's demand sum.
    """
    s = np.ones(len(totals))
    for clique in cliques:
        tot = float(totals[clique].sum())
        if tot > 1.0:
            s[clique] = np.minimum(s[clique], 1.0 / tot)
    return s


def observed_busy(adjacency: np.ndarray, alloc_totals: np.ndarray) -> np.ndarray:
    """Busy airtime seen by each AP: its own allocation plus one-hop
    neighbors' (unclipped)."""
    return alloc_totals + adjacency @ alloc_totals


def solve_allocation(demands: list[AirtimeDemand],
                     graphs: list[ContentionGraph]) -> AirtimeSolution:
    """Resolve all demands into a feasible proportional allocation.

    Deterministic and independent of the order of `demands` and of flow
    ids (per-AP totals use exact summation).
    """
    n_aps = graphs[0].n_aps
    by_key: dict[tuple[int, int], dict[int, float]] = {}
    for d in demands:
        slot = by_key.setdefault((d.ap_id, d.band), {})
        for fid, a in d.per_flow.items():
            if a < 0 or not math.isfinite(a):
                raise ValueError(f"demand for flow {fid} must be finite and >= 0")
            slot[fid] = slot.get(fid, 0.0) + a

    alloc: dict[tuple[int, int, int], float] = {}
    occupancy: dict[tuple[int, int], float] = {}
    free: dict[tuple[int, int], float] = {}
    observed: dict[tuple[int, int], dict[int, float]] = {}
    for graph in graphs:
        band = graph.band
        totals = np.zeros(n_aps)
        for (ap, b), flows in by_key.items():
            if b == band:
                totals[ap] = math.fsum(flows[k] for k in sorted(flows))
        s = band_scalings(totals, maximal_cliques(graph))
        for (ap, b), flows in by_key.items():
            if b == band:
                for fid, a in flows.items():
                    alloc[(ap, band, fid)] = a * s[ap]
        busy = observed_busy(graph.adjacency, totals * s)
        for ap in range(n_aps):
            occupancy[(ap, band)] = min(1.0, float(busy[ap]))
            free[(ap, band)] = max(0.0, 1.0 - float(busy[ap]))
            obs: dict[int, float] = {}
            for other in [ap] + graph.neighbors(ap):
                for fid, a in by_key.get((other, band), {}).items():
                    obs[fid] = a * s[other]
            observed[(ap, band)] = obs
    return AirtimeSolution(alloc, occupancy, free, observed)


def residual_free(solution: AirtimeSolution, ap_id: int, band: int,
                  exclude_flows: frozenset[int] | set[int] = frozenset()) -> float:
    """Free airtime at (ap, band) with the excluded flows' allocations
    removed from the busy sum."""
    obs = solution.observed.get((ap_id, band), {})
    busy = math.fsum(obs[fid] for fid in sorted(obs) if fid not in exclude_flows)
    return max(0.0, 1.0 - busy)
