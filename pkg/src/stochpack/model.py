"""Instances, partitions and the normalized (a, b) coordinates."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class PackingError(ValueError):
    """Base class for all input errors raised by this package."""


class MalformedPartitionError(PackingError):
    pass


class DimensionError(PackingError):
    pass


class InfeasibleError(PackingError):
    """Total capacity is below the total mean demand."""


class CapacityError(PackingError):
    """An exhaustive routine was asked for an input that is too large."""


@dataclass(frozen=True)
class ServiceDemand:
    mu: float
    var: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise PackingError(f"service mean must be finite and >= 0, got {self.mu}")
        if not (math.isfinite(self.var) and self.var > 0):
            raise PackingError(f"service variance must be finite and > 0, got {self.var}")
        if self.mu > 0 and self.var > self.mu * self.mu:
            warnings.warn(
                f"service (mu={self.mu}, var={self.var}) has var > mu^2; "
                "negative demand is not negligible",
                stacklevel=3,
            )


@dataclass(frozen=True)
class Instance:
    capacities: tuple[float, ...]
    services: tuple[ServiceDemand, ...]

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))
        object.__setattr__(self, "services", tuple(self.services))
        if not self.capacities:
            raise PackingError("at least one bin is required")
        if not self.services:
            raise PackingError("at least one service is required")
        # zero-capacity bins are allowed so the single-bin limit of a
        # capacity split can be expressed as an instance
        if any(not (math.isfinite(c) and c >= 0) for c in self.capacities):
            raise PackingError(f"capacities must be finite and >= 0: {self.capacities}")
        if self.total_mu <= 0:
            raise PackingError("total mean demand must be positive")

    @classmethod
    def from_arrays(cls, capacities, mus, variances) -> Instance:
        return cls(
            tuple(capacities),
            tuple(ServiceDemand(float(m), float(v)) for m, v in zip(mus, variances)),
        )

    @property
    def k(self) -> int:
        return len(self.capacities)

    @property
    def n(self) -> int:
        return len(self.services)

    @property
    def mus(self) -> np.ndarray:
        return np.array([s.mu for s in self.services], dtype=float)

    @property
    def variances(self) -> np.ndarray:
        return np.array([s.var for s in self.services], dtype=float)

    @property
    def total_mu(self) -> float:
        return math.fsum(s.mu for s in self.services)

    @property
    def total_var(self) -> float:
        return math.fsum(s.var for s in self.services)

    @property
    def total_capacity(self) -> float:
        return math.fsum(self.capacities)

    def check_feasible(self) -> None:
        if self.total_capacity < self.total_mu:
            raise InfeasibleError(
                f"total capacity {self.total_capacity:g} is below total mean "
                f"demand {self.total_mu:g}"
            )


@dataclass(frozen=True)
class Partition:
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(j) for j in self.assignment))

    def validate(self, instance: Instance) -> None:
        if len(self.assignment) != instance.n:
            raise MalformedPartitionError(
                f"partition has {len(self.assignment)} entries, instance has "
                f"{instance.n} services"
            )
        bad = [j for j in self.assignment if not 0 <= j < instance.k]
        if bad:
            raise MalformedPartitionError(f"bin index out of range [0, {instance.k}): {bad[0]}")

    def bins(self, k: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(k)]
        for i, j in enumerate(self.assignment):
            out[j].append(i)
        return out


@dataclass(frozen=True)
class NormalizedPoint:
    a: float
    b: float


@dataclass(frozen=True)
class BinStats:
    mu: float
    var: float
    sigma: float
    delta: float


def make_bin_stats(capacity: float, mu: float, var: float) -> BinStats:
    """Bin statistics with the zero-variance convention for ``delta``."""
    var = max(var, 0.0)
    sigma = math.sqrt(var)
    if var > 0:
        delta = (capacity - mu) / sigma
    else:
        delta = math.inf if capacity >= mu else -math.inf
    return BinStats(mu, var, sigma, delta)


def vmr(service: ServiceDemand) -> float:
    """Variance-to-mean ratio; zero-mean services are infinitely risky."""
    if service.mu == 0:
        return math.inf
    return service.var / service.mu


def sort_by_vmr(instance: Instance) -> list[int]:
    """Service indices by ascending VMR, ties kept in index order."""
    keys = [vmr(s) for s in instance.services]
    return sorted(range(instance.n), key=lambda i: (keys[i], i))


def bin_stats(instance: Instance, partition: Partition) -> list[BinStats]:
    partition.validate(instance)
    groups = partition.bins(instance.k)
    stats = []
    for c, members in zip(instance.capacities, groups):
        mu = math.fsum(instance.services[i].mu for i in members)
        var = math.fsum(instance.services[i].var for i in members)
        stats.append(make_bin_stats(c, mu, var))
    return stats


def normalize(instance: Instance, partition: Partition) -> NormalizedPoint:
    """(share of total mean, share of total variance) held by bin one."""
    if instance.k != 2:
        raise DimensionError(f"normalize needs exactly 2 bins, got {instance.k}")
    partition.validate(instance)
    members = partition.bins(2)[0]
    a = math.fsum(instance.services[i].mu for i in members) / instance.total_mu
    b = math.fsum(instance.services[i].var for i in members) / instance.total_var
    return NormalizedPoint(a, b)


def service_vectors(instance: Instance) -> np.ndarray:
    """Per-service normalized vectors ``(mu_i / mu, var_i / V)``, shape (n, 2)."""
    return np.column_stack(
        [instance.mus / instance.total_mu, instance.variances / instance.total_var]
    )


# -- JSON ---------------------------------------------------------------------

def _check_keys(obj, allowed: set[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise PackingError(f"{what} must be a JSON object")
    extra = set(obj) - allowed
    if extra:
        raise PackingError(f"unknown field(s) in {what}: {sorted(extra)}")
    missing = allowed - set(obj)
    if missing:
        raise PackingError(f"missing field(s) in {what}: {sorted(missing)}")


def instance_from_dict(obj) -> Instance:
    _check_keys(obj, {"capacities", "services"}, "instance")
    services = []
    for s in obj["services"]:
        _check_keys(s, {"mu", "var"}, "service")
        services.append(ServiceDemand(float(s["mu"]), float(s["var"])))
    return Instance(tuple(float(c) for c in obj["capacities"]), tuple(services))


def instance_to_dict(instance: Instance) -> dict:
    return {
        "capacities": list(instance.capacities),
        "services": [{"mu": s.mu, "var": s.var} for s in instance.services],
    }


def partition_from_dict(obj) -> Partition:
    _check_keys(obj, {"assignment"}, "partition")
    return Partition(tuple(int(j) for j in obj["assignment"]))


def partition_to_dict(partition: Partition) -> dict:
    return {"assignment": list(partition.assignment)}


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as f:
        return instance_from_dict(json.load(f))


def dump_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(instance_to_dict(instance), f, indent=2)
        f.write("\n")


def capacity_order(capacities: Sequence[float]) -> list[int]:
    """Bin indices by ascending capacity, ties kept in index order."""
    return sorted(range(len(capacities)), key=lambda j: (capacities[j], j))
