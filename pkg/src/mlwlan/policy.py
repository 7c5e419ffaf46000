"""Traffic-to-link allocation policies.

Each policy maps a flow to a weight vector over the bands enabled at its
destination station.  Weights are non-negative, sum to one, and are zero on
disabled bands.

Non-dynamic policies decide once, at flow arrival:

* SLCI sends the whole flow to the band with the most free airtime.
* MCAA splits the flow across enabled bands in proportion to their free
  airtime, so congested bands receive little or nothing.
* Legacy single-link stations always use their pinned band.

The dynamic MCAB policy re-places all of an AP's flows, shortest enabled
set first, whenever one of its flows arrives or its periodic timer fires.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvalidScenarioError


@dataclass(frozen=True)
class PolicyInput:
    """Decision input for one flow: which bands its destination can use and
    how much free airtime the serving AP currently sees on each."""
    enabled: tuple[bool, ...]
    rho: tuple[float, ...]
    arrival_time: float = 0.0
    flow_id: Optional[int] = None


def _require_enabled(enabled: Sequence[bool]) -> None:
    if not any(enabled):
        raise InvalidScenarioError("flow destination has no enabled interface")


def proportional_weights(enabled: Sequence[bool],
                         rho: Sequence[float]) -> tuple[float, ...]:
    """Free-airtime-proportional split over enabled bands; uniform when no
    enabled band has free airtime left."""
    _require_enabled(enabled)
    total = sum(r for e, r in zip(enabled, rho) if e)
    if total <= 0.0:
        n = sum(1 for e in enabled if e)
        return tuple((1.0 / n) if e else 0.0 for e in enabled)
    return tuple((r / total) if e else 0.0 for e, r in zip(enabled, rho))


def slci(inp: PolicyInput) -> tuple[float, ...]:
    """Whole flow onto the least congested enabled band (max free airtime);
    ties go to the lowest band index, i.e. the lowest carrier frequency."""
    _require_enabled(inp.enabled)
    best = None
    for i, (e, r) in enumerate(zip(inp.enabled, inp.rho)):
        if e and (best is None or r > inp.rho[best]):
            best = i
    return tuple(1.0 if i == best else 0.0 for i in range(len(inp.enabled)))


def mcaa(inp: PolicyInput) -> tuple[float, ...]:
    """Free-airtime-proportional split; already active flows are untouched."""
    return proportional_weights(inp.enabled, inp.rho)


def legacy_assign(inp: PolicyInput, assigned_band: int) -> tuple[float, ...]:
    """Single-link station: everything on the pinned band."""
    if not inp.enabled[assigned_band]:
        raise InvalidScenarioError(
            f"assigned band {assigned_band} is not enabled at the destination")
    return tuple(1.0 if i == assigned_band else 0.0
                 for i in range(len(inp.enabled)))


@dataclass(frozen=True)
class McabFlow:
    """What the dynamic reallocation needs to know about one active flow."""
    flow_id: int
    enabled: tuple[bool, ...]
    arrival_time: float
    # Airtime the flow would demand per unit weight on each band
    # (load / effective rate); 0 on disabled bands.
    unit_airtime: tuple[float, ...]


def mcab_order(flows: Sequence[McabFlow]) -> list[McabFlow]:
    """Reallocation order: fewest enabled interfaces first, then arrival
    time, then flow id (total order for determinism)."""
    return sorted(flows, key=lambda f: (sum(f.enabled), f.arrival_time,
                                        f.flow_id))


def mcab_reallocate(flows: Sequence[McabFlow],
                    base_free: Sequence[float]) -> dict[int, tuple[float, ...]]:
    """Re-place all of one AP's flows against residual free airtime.

    `base_free` is the free airtime per band with every flow of this AP
    excluded from the busy time (neighbors' allocations only).  Flows are
    processed in :func:`mcab_order`; each gets proportional weights on the
    current residuals, then its demanded airtime is added back to the busy
    time, clipped at the band's remaining room, before the next flow is
    placed.  The reallocation is treated as instantaneous.
    """
    busy = [min(1.0, max(0.0, 1.0 - r)) for r in base_free]
    out: dict[int, tuple[float, ...]] = {}
    for f in mcab_order(flows):
        rho = tuple(max(0.0, 1.0 - b) for b in busy)
        weights = proportional_weights(f.enabled, rho)
        for i, w in enumerate(weights):
            if w > 0.0:
                demand = w * f.unit_airtime[i]
                busy[i] += min(demand, max(0.0, 1.0 - busy[i]))
        out[f.flow_id] = weights
    return out
