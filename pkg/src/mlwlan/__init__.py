"""Flow-level simulator of multi-link Wi-Fi networks.

The package models networks of access points that serve downlink traffic
over up to three frequency bands at once.  Traffic is handled at flow
granularity: an event-driven engine moves flows in and out of the network,
allocation policies decide how each flow's load is split across the bands
enabled at its destination, and a channel-occupancy abstraction resolves
contention between neighboring access points into feasible airtime shares.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .scenario import Band, Capability, Policy, Scenario, TrafficKind

__all__ = [
    "Band",
    "Capability",
    "Policy",
    "RunConfig",
    "Scenario",
    "TrafficKind",
    "__version__",
]
