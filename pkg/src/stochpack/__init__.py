"""Stochastic packing of independent normal demands into capacitated bins."""

from .baselines import solve_bm
from .costs import CostModel, TwoBinContext, cost2, partition_cost
from .model import (
    CapacityError,
    DimensionError,
    InfeasibleError,
    Instance,
    MalformedPartitionError,
    NormalizedPoint,
    PackingError,
    Partition,
    ServiceDemand,
)
from .solver import (
    brute_force_integral,
    error_certificate,
    solve_fractional_two_bins,
    solve_k_bins_dp,
    solve_two_bins,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CostModel",
    "DimensionError",
    "InfeasibleError",
    "Instance",
    "MalformedPartitionError",
    "NormalizedPoint",
    "PackingError",
    "Partition",
    "ServiceDemand",
    "TwoBinContext",
    "brute_force_integral",
    "cost2",
    "error_certificate",
    "partition_cost",
    "solve_bm",
    "solve_fractional_two_bins",
    "solve_k_bins_dp",
    "solve_two_bins",
]
