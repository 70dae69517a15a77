"""The three packing objectives, their two-bin surfaces and derivatives.

Two-bin surfaces are parametrized by the normalized point ``(a, b)``:
bin one holds mean ``a * mu`` and variance ``b * V``, bin two the rest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import gauss
from .model import (
    BinStats,
    DimensionError,
    InfeasibleError,
    Instance,
    NormalizedPoint,
    PackingError,
    Partition,
    bin_stats,
)
from .search import golden_section


class DomainError(PackingError):
    """A derivative was requested on the boundary of the unit square."""


class CostModel(enum.Enum):
    SPMED = "SPMED"    # total expected overflow
    SPMWOP = "SPMWOP"  # worst per-bin overflow probability
    SPMOP = "SPMOP"    # probability that any bin overflows

    @classmethod
    def parse(cls, name: str) -> CostModel:
        key = name.upper().replace("-", "").replace("_", "")
        try:
            return cls(key)
        except ValueError:
            raise PackingError(f"unknown cost model {name!r}") from None


@dataclass(frozen=True)
class TwoBinContext:
    c1: float
    c2: float
    mu: float
    var: float

    def __post_init__(self):
        if self.c1 > self.c2:
            raise PackingError(f"bins must be ordered by capacity, got c1={self.c1} > c2={self.c2}")
        if not (self.mu > 0 and self.var > 0):
            raise PackingError("total mean and variance must be positive")
        if self.c1 + self.c2 < self.mu:
            raise InfeasibleError(
                f"total capacity {self.c1 + self.c2:g} is below total mean {self.mu:g}"
            )

    @classmethod
    def of(cls, c1, c2, mu, var) -> TwoBinContext:
        lo, hi = sorted((float(c1), float(c2)))
        return cls(lo, hi, float(mu), float(var))

    @classmethod
    def from_instance(cls, instance: Instance) -> TwoBinContext:
        if instance.k != 2:
            raise DimensionError(f"two-bin context needs k=2, got {instance.k}")
        return cls.of(*instance.capacities, instance.total_mu, instance.total_var)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.var)

    @property
    def c(self) -> float:
        return self.c1 + self.c2

    @property
    def shift(self) -> float:
        """Offset ``(c2 - c1) / mu`` of the reflection symmetry."""
        return (self.c2 - self.c1) / self.mu


# -- single bin ---------------------------------------------------------------

def deviation_raw(c, m, v):
    """Expected overflow of a bin with capacity ``c``, mean ``m``, variance ``v``.

    Zero-variance bins take the deterministic limit ``max(0, m - c)``.
    """
    c, m, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (c, m, v)))
    v = np.maximum(v, 0.0)
    s = np.sqrt(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (c - m) / s
        out = np.where(v > 0, s * gauss.g(np.where(v > 0, d, 0.0)), np.maximum(m - c, 0.0))
    return gauss._ret(out)


def overflow_raw(c, m, v):
    """Overflow probability; zero-variance bins overflow iff ``m > c``."""
    c, m, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (c, m, v)))
    v = np.maximum(v, 0.0)
    s = np.sqrt(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (c - m) / s
        out = np.where(v > 0, gauss.Q(np.where(v > 0, d, 0.0)), (m > c).astype(float))
    return gauss._ret(out)


def bin_deviation(c_j: float, stats: BinStats) -> float:
    return deviation_raw(c_j, stats.mu, stats.var)


def bin_overflow_prob(c_j: float, stats: BinStats) -> float:
    return overflow_raw(c_j, stats.mu, stats.var)


def combine_overflows(qs, model: CostModel, axis=0):
    """Aggregate per-bin overflow probabilities into the model's cost."""
    qs = np.asarray(qs, dtype=float)
    if model is CostModel.SPMWOP:
        return gauss._ret(np.max(qs, axis=axis))
    with np.errstate(divide="ignore"):
        log_ok = np.sum(np.log1p(-qs), axis=axis)
    return gauss._ret(-np.expm1(log_ok))


def bins_cost(caps, mus, variances, model: CostModel) -> float:
    """Cost of a set of bins given per-bin capacity, mean and variance."""
    if model is CostModel.SPMED:
        return math.fsum(np.atleast_1d(deviation_raw(caps, mus, variances)))
    return combine_overflows(np.atleast_1d(overflow_raw(caps, mus, variances)), model)


def partition_cost(instance: Instance, partition: Partition, model: CostModel) -> float:
    stats = bin_stats(instance, partition)
    return bins_cost(
        instance.capacities, [s.mu for s in stats], [s.var for s in stats], model
    )


# -- two-bin surface ------------------------------------------------------------

def _split(a, b, ctx: TwoBinContext):
    a = np.asarray(a, dtype=float)
    b = np.clip(np.asarray(b, dtype=float), 0.0, 1.0)
    return a * ctx.mu, b * ctx.var, (1.0 - a) * ctx.mu, (1.0 - b) * ctx.var


def two_bin_cost(c1, c2, m1, v1, m2, v2, model: CostModel):
    """Vectorized cost of two bins from raw sums."""
    if model is CostModel.SPMED:
        return gauss._ret(deviation_raw(c1, m1, v1) + deviation_raw(c2, m2, v2))
    q1 = np.asarray(overflow_raw(c1, m1, v1))
    q2 = np.asarray(overflow_raw(c2, m2, v2))
    if model is CostModel.SPMWOP:
        return gauss._ret(np.maximum(q1, q2))
    with np.errstate(divide="ignore"):
        return gauss._ret(-np.expm1(np.log1p(-q1) + np.log1p(-q2)))


def cost2_ab(a, b, ctx: TwoBinContext, model: CostModel):
    """Array form of :func:`cost2`."""
    m1, v1, m2, v2 = _split(a, b, ctx)
    return two_bin_cost(ctx.c1, ctx.c2, m1, v1, m2, v2, model)


def cost2(point: NormalizedPoint, ctx: TwoBinContext, model: CostModel) -> float:
    return cost2_ab(point.a, point.b, ctx, model)


def deltas2(a: float, b: float, ctx: TwoBinContext) -> tuple[float, float]:
    s1 = math.sqrt(b) * ctx.sigma
    s2 = math.sqrt(1.0 - b) * ctx.sigma
    return (ctx.c1 - a * ctx.mu) / s1, (ctx.c2 - (1.0 - a) * ctx.mu) / s2


def _interior(point: NormalizedPoint) -> None:
    if not (0.0 < point.a < 1.0 and 0.0 < point.b < 1.0):
        raise DomainError(f"derivatives need a strictly interior point, got ({point.a}, {point.b})")


def grad2_spmed(point: NormalizedPoint, ctx: TwoBinContext) -> tuple[float, float]:
    """Closed-form gradient of the expected-deviation surface."""
    _interior(point)
    a, b = point.a, point.b
    d1, d2 = deltas2(a, b, ctx)
    # difference of the two tails on the side where they are small
    if d1 + d2 > 0:
        da = ctx.mu * (gauss.Q(d1) - gauss.Q(d2))
    else:
        da = ctx.mu * (gauss.Phi(d2) - gauss.Phi(d1))
    db = 0.5 * ctx.sigma * (gauss.phi(d1) / math.sqrt(b) - gauss.phi(d2) / math.sqrt(1.0 - b))
    return da, db


def hessian2_spmed(point: NormalizedPoint, ctx: TwoBinContext) -> np.ndarray:
    _interior(point)
    a, b = point.a, point.b
    mu, sigma = ctx.mu, ctx.sigma
    d1, d2 = deltas2(a, b, ctx)
    p1, p2 = gauss.phi(d1), gauss.phi(d2)
    s1, s2 = math.sqrt(b) * sigma, math.sqrt(1.0 - b) * sigma
    haa = mu * mu * (p2 / s2 + p1 / s1)
    hbb = 0.25 * sigma * (
        p1 * (d1 * d1 - 1.0) / b ** 1.5 + p2 * (d2 * d2 - 1.0) / (1.0 - b) ** 1.5
    )
    hab = mu * (d1 * p1 / (2.0 * b) + d2 * p2 / (2.0 * (1.0 - b)))
    return np.array([[haa, hab], [hab, hbb]])


def _ofp_branch_grads(point: NormalizedPoint, ctx: TwoBinContext):
    a, b = point.a, point.b
    d1, d2 = deltas2(a, b, ctx)
    s1, s2 = math.sqrt(b) * ctx.sigma, math.sqrt(1.0 - b) * ctx.sigma
    p1, p2 = gauss.phi(d1), gauss.phi(d2)
    g1 = (ctx.mu * p1 / s1, p1 * d1 / (2.0 * b))
    g2 = (-ctx.mu * p2 / s2, -p2 * d2 / (2.0 * (1.0 - b)))
    return d1, d2, g1, g2


def grad2_branches(point: NormalizedPoint, ctx: TwoBinContext, model: CostModel):
    """Gradients of the two-bin surface at an interior point.

    Returns a list with one gradient for the smooth objectives. The
    worst-overflow objective is a max of two smooth branches; the active
    branch is returned, or both when the branches tie.
    """
    _interior(point)
    if model is CostModel.SPMED:
        return [grad2_spmed(point, ctx)]
    d1, d2, g1, g2 = _ofp_branch_grads(point, ctx)
    if model is CostModel.SPMWOP:
        q1, q2 = gauss.Q(d1), gauss.Q(d2)
        if q1 > q2:
            return [g1]
        if q2 > q1:
            return [g2]
        return [g1, g2]
    P1, P2 = gauss.Phi(d1), gauss.Phi(d2)
    return [(g1[0] * P2 + g2[0] * P1, g1[1] * P2 + g2[1] * P1)]


def grad2(point: NormalizedPoint, ctx: TwoBinContext, model: CostModel) -> tuple[float, float]:
    return grad2_branches(point, ctx, model)[0]


# -- valley and saddle --------------------------------------------------------------

def saddle_point(ctx: TwoBinContext) -> NormalizedPoint:
    return NormalizedPoint(0.5 - 0.5 * ctx.shift, 0.5)


def _equal_delta_a(b: float, ctx: TwoBinContext) -> float:
    rb, rc = math.sqrt(b), math.sqrt(1.0 - b)
    return (ctx.c1 * rc - (ctx.c2 - ctx.mu) * rb) / (ctx.mu * (rc + rb))


def valley_a(b: float, ctx: TwoBinContext, model: CostModel) -> float:
    """The a-coordinate minimizing the two-bin cost for fixed ``b``.

    For the deviation and worst-overflow objectives this is where both
    bins have equal spare capacity in standard deviations. For the
    any-overflow objective the minimizer has no closed form and is found
    by golden-section search on ``-log(Phi(d1) * Phi(d2))``, which is
    strictly convex in ``a``.
    """
    if not 0.0 < b < 1.0:
        raise DomainError(f"valley is defined for 0 < b < 1, got {b}")
    if model is not CostModel.SPMOP:
        return min(1.0, max(0.0, _equal_delta_a(b, ctx)))

    s1 = math.sqrt(b) * ctx.sigma
    s2 = math.sqrt(1.0 - b) * ctx.sigma

    def neg_log_ok(a):
        return -(gauss.log_Phi((ctx.c1 - a * ctx.mu) / s1)
                 + gauss.log_Phi((ctx.c2 - (1.0 - a) * ctx.mu) / s2))

    a, _ = golden_section(neg_log_ok, 0.0, 1.0, tol=1e-10)
    return a


def valley_cost(b: float, ctx: TwoBinContext, model: CostModel) -> float:
    return cost2_ab(valley_a(b, ctx, model), b, ctx, model)


def valley_delta(b: float, ctx: TwoBinContext) -> float:
    """Common spare capacity (in std units) of both bins on the equal-delta valley."""
    return (ctx.c - ctx.mu) / ctx.sigma / (math.sqrt(b) + math.sqrt(1.0 - b))
