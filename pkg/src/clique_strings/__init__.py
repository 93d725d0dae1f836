"""Congested Clique simulator and string algorithms with round accounting."""

from .errors import CliqueError, LedgerViolation
from .netsim import DistributedArray, Network, Query, RoundLedger, SimConfig

__all__ = [
    "CliqueError",
    "DistributedArray",
    "LedgerViolation",
    "Network",
    "Query",
    "RoundLedger",
    "SimConfig",
]
__version__ = "0.1.0"
