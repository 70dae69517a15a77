"""Sorting-based packing algorithms, exhaustive oracles and error certificates.

Services are ordered by variance-to-mean ratio and bins by capacity; every
algorithm here searches over consecutive runs of that service order, with
lower-risk runs going to smaller bins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import gauss
from .costs import (
    CostModel,
    DomainError,
    TwoBinContext,
    combine_overflows,
    deviation_raw,
    grad2_branches,
    overflow_raw,
    partition_cost,
    two_bin_cost,
)
from .model import (
    CapacityError,
    DimensionError,
    Instance,
    NormalizedPoint,
    Partition,
    capacity_order,
    service_vectors,
    sort_by_vmr,
)
from .search import golden_section

SCAN_POINTS = 64
T_TOL = 1e-10
BRUTE_LIMIT = 1 << 24
CUTS_LIMIT = 2_000_000


@dataclass(frozen=True)
class TwoBinSolution:
    split_index: int
    partition: Partition
    cost: float
    order: tuple[int, ...]


@dataclass(frozen=True)
class FractionalSolution:
    point: NormalizedPoint
    segment_index: int
    split_fraction: float
    cost: float


@dataclass(frozen=True)
class KSolution:
    cut_points: tuple[int, ...]
    partition: Partition
    cost: float


@dataclass(frozen=True)
class ErrorCertificate:
    algorithm_cost: float
    fractional_cost: float
    gradient_bound: float
    conservative_bound: float
    closed_form_bound: Optional[float]
    L_over_n: float
    alpha: float
    applicable: bool
    reason: str = ""

    @property
    def gap(self) -> float:
        return self.algorithm_cost - self.fractional_cost

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap"] = self.gap
        return d


# -- two bins -------------------------------------------------------------------

def _require_two_bins(instance: Instance) -> None:
    if instance.k != 2:
        raise DimensionError(f"expected a two-bin instance, got k={instance.k}")
    instance.check_feasible()


def _prefix_suffix(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Correctly rounded prefix and suffix sums, each of length n + 1."""
    n = len(values)
    pre = np.array([math.fsum(values[:i]) for i in range(n + 1)])
    suf = np.array([math.fsum(values[i:]) for i in range(n + 1)])
    return pre, suf


@dataclass
class _PathSums:
    order: list[int]
    lo_bin: int
    hi_bin: int
    c1: float
    c2: float
    mu_pre: np.ndarray
    mu_suf: np.ndarray
    var_pre: np.ndarray
    var_suf: np.ndarray
    mus: np.ndarray
    variances: np.ndarray

    @classmethod
    def build(cls, instance: Instance) -> _PathSums:
        order = sort_by_vmr(instance)
        lo_bin, hi_bin = capacity_order(instance.capacities)
        mus = instance.mus[order]
        variances = instance.variances[order]
        mu_pre, mu_suf = _prefix_suffix(mus)
        var_pre, var_suf = _prefix_suffix(variances)
        return cls(
            order, lo_bin, hi_bin,
            instance.capacities[lo_bin], instance.capacities[hi_bin],
            mu_pre, mu_suf, var_pre, var_suf, mus, variances,
        )

    def vertex_costs(self, model: CostModel) -> np.ndarray:
        return np.atleast_1d(two_bin_cost(
            self.c1, self.c2, self.mu_pre, self.var_pre, self.mu_suf, self.var_suf, model
        ))

    def segment_cost(self, s: int, t, model: CostModel):
        """Cost with services before ``s`` and a fraction ``t`` of service ``s`` in bin one."""
        t = np.asarray(t, dtype=float)
        m, v = self.mus[s], self.variances[s]
        return two_bin_cost(
            self.c1, self.c2,
            self.mu_pre[s] + t * m, self.var_pre[s] + t * v,
            self.mu_suf[s + 1] + (1.0 - t) * m, self.var_suf[s + 1] + (1.0 - t) * v,
            model,
        )

    def assignment(self, split: int) -> Partition:
        out = [self.hi_bin] * len(self.order)
        for i in self.order[:split]:
            out[i] = self.lo_bin
        return Partition(tuple(out))


def solve_two_bins(instance: Instance, model: CostModel) -> TwoBinSolution:
    """Best split of the VMR-sorted services between the two bins.

    The ``i`` lowest-VMR services go to the smaller bin; every ``i`` in
    ``0..n`` is tried and the cheapest (smallest ``i`` on ties) is kept.
    """
    _require_two_bins(instance)
    sums = _PathSums.build(instance)
    costs = sums.vertex_costs(model)
    best = int(np.argmin(costs))
    return TwoBinSolution(best, sums.assignment(best), float(costs[best]), tuple(sums.order))


def _point_on_path(sums: _PathSums, s: int, t: float, total_mu: float, total_var: float):
    a = (sums.mu_pre[s] + t * sums.mus[s]) / total_mu
    b = (sums.var_pre[s] + t * sums.variances[s]) / total_var
    return NormalizedPoint(float(a), float(b))


def _fractional(instance: Instance, model: CostModel, sums: _PathSums) -> FractionalSolution:
    n = instance.n
    vcost = sums.vertex_costs(model)
    ts = np.linspace(0.0, 1.0, SCAN_POINTS + 1)

    best = (float(vcost[0]), 0, 0.0)
    for s in range(n):
        scan = np.atleast_1d(sums.segment_cost(s, ts, model)).copy()
        scan[0], scan[-1] = vcost[s], vcost[s + 1]
        j = int(np.argmin(scan))
        cand = (float(scan[j]), s, float(ts[j]))
        if 0 < j < SCAN_POINTS:
            t, c = golden_section(
                lambda x: float(sums.segment_cost(s, x, model)), ts[j - 1], ts[j + 1], T_TOL
            )
            if c < cand[0]:
                cand = (float(c), s, float(t))
        if cand[0] < best[0]:
            best = cand

    cost, s, t = best
    point = _point_on_path(sums, s, t, instance.total_mu, instance.total_var)
    return FractionalSolution(point, s, t, cost)


def solve_fractional_two_bins(instance: Instance, model: CostModel) -> FractionalSolution:
    """Minimize the two-bin cost along the bottom sorted path.

    Each path segment is scanned at 65 evenly spaced fractions and the
    best scan point refined by golden-section search. Path vertices are
    costed exactly as :func:`solve_two_bins` costs them, so the result is
    never worse than the integral sorting solution.
    """
    _require_two_bins(instance)
    return _fractional(instance, model, _PathSums.build(instance))


# -- k bins ---------------------------------------------------------------------

def _segment_losses(instance: Instance, order: Sequence[int], caps: Sequence[float],
                    model: CostModel) -> np.ndarray:
    """Per-bin loss of every consecutive run ``order[i:i2]``, shape (k, n+1, n+1).

    Losses are combined by addition (expected overflow, and minus log of
    the no-overflow probability) or by max (worst overflow probability).
    Entries with ``i > i2`` are +inf.
    """
    n = len(order)
    mus = np.concatenate([[0.0], instance.mus[list(order)]]).astype(np.longdouble)
    vs = np.concatenate([[0.0], instance.variances[list(order)]]).astype(np.longdouble)
    pm, pv = np.cumsum(mus), np.cumsum(vs)
    m = (pm[None, :] - pm[:, None]).astype(float)
    v = (pv[None, :] - pv[:, None]).astype(float)
    i, i2 = np.indices((n + 1, n + 1))
    empty = i == i2
    m[empty] = 0.0
    v[empty] = 0.0
    invalid = i > i2
    m[invalid] = 0.0
    v[invalid] = 0.0

    out = np.empty((len(caps), n + 1, n + 1))
    for j, c in enumerate(caps):
        if model is CostModel.SPMED:
            loss = deviation_raw(c, m, v)
        elif model is CostModel.SPMWOP:
            loss = overflow_raw(c, m, v)
        else:
            s = np.sqrt(np.maximum(v, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(v > 0, (c - m) / np.where(v > 0, s, 1.0), 0.0)
                loss = np.where(v > 0, -gauss.log_Phi(d), np.where(m > c, np.inf, 0.0))
        out[j] = np.where(invalid, np.inf, loss)
    return out


class _Node:
    """One node of the bin-halving recursion: bins ``[lo, lo + m)``."""

    def __init__(self, lo: int, m: int, rows: np.ndarray, cols: np.ndarray):
        self.lo, self.m, self.rows, self.cols = lo, m, rows, cols
        self.table: np.ndarray
        self.split: Optional[np.ndarray] = None
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None

    def solve(self, losses: np.ndarray, use_max: bool, n: int) -> None:
        if self.m == 1:
            self.table = losses[self.lo][np.ix_(self.rows, self.cols)]
            return
        every = np.arange(n + 1)
        m1 = (self.m + 1) // 2
        self.left = _Node(self.lo, m1, self.rows, every)
        self.right = _Node(self.lo + m1, self.m - m1, every, self.cols)
        self.left.solve(losses, use_max, n)
        self.right.solve(losses, use_max, n)

        L, R = self.left.table, self.right.table
        table = np.empty((len(self.rows), len(self.cols)))
        split = np.empty((len(self.rows), len(self.cols)), dtype=np.int64)
        for r in range(len(self.rows)):
            comb = np.maximum(L[r][:, None], R) if use_max else L[r][:, None] + R
            # first minimum = smallest split point
            idx = np.argmin(comb, axis=0)
            split[r] = idx
            table[r] = comb[idx, np.arange(len(self.cols))]
        self.table, self.split = table, split

    def cuts(self, i: int, i2: int) -> list[int]:
        """Internal cut points of the optimal run split of ``[i, i2)`` over this node's bins."""
        if self.m == 1:
            return []
        r = int(np.searchsorted(self.rows, i))
        c = int(np.searchsorted(self.cols, i2))
        x = int(self.split[r, c])
        return self.left.cuts(i, x) + [x] + self.right.cuts(x, i2)


def _partition_from_cuts(n: int, order: Sequence[int], bins: Sequence[int],
                         cuts: Sequence[int]) -> Partition:
    bounds = [0, *cuts, n]
    out = [0] * n
    for j, b in enumerate(bins):
        for pos in range(bounds[j], bounds[j + 1]):
            out[order[pos]] = b
    return Partition(tuple(out))


def solve_k_bins_dp(instance: Instance, model: CostModel) -> KSolution:
    """Optimal consecutive split of the VMR-sorted services over capacity-sorted bins.

    A bin range of size ``m`` is split into halves of ``ceil(m/2)`` and
    ``floor(m/2)`` bins and the best service cut between them is chosen
    from the halves' tables, recursively. Only the table rows and columns
    that the parent can ask for are computed.
    """
    instance.check_feasible()
    n, k = instance.n, instance.k
    order = sort_by_vmr(instance)
    bins = capacity_order(instance.capacities)
    caps = [instance.capacities[j] for j in bins]
    if k == 1:
        cuts: list[int] = []
    else:
        losses = _segment_losses(instance, order, caps, model)
        root = _Node(0, k, np.array([0]), np.array([n]))
        root.solve(losses, model is CostModel.SPMWOP, n)
        cuts = root.cuts(0, n)
    partition = _partition_from_cuts(n, order, bins, cuts)
    return KSolution(tuple(cuts), partition, partition_cost(instance, partition, model))


# -- exhaustive oracles -------------------------------------------------------------

def exhaustive_consecutive_cuts(instance: Instance, model: CostModel) -> KSolution:
    """Try every nondecreasing cut vector; lexicographically first minimum wins."""
    n, k = instance.n, instance.k
    if math.comb(n + k - 1, k - 1) > CUTS_LIMIT:
        raise CapacityError("too many cut placements for exhaustive search")
    order = sort_by_vmr(instance)
    bins = capacity_order(instance.capacities)
    best = None
    for cuts in itertools.combinations_with_replacement(range(n + 1), k - 1):
        p = _partition_from_cuts(n, order, bins, cuts)
        c = partition_cost(instance, p, model)
        if best is None or c < best.cost:
            best = KSolution(tuple(cuts), p, c)
    return best


def _vector_costs(caps, mus, variances, model):
    """Costs of many assignments at once; ``mus``/``variances`` are (chunk, k)."""
    caps = np.asarray(caps, dtype=float)[None, :]
    if model is CostModel.SPMED:
        return np.sum(deviation_raw(caps, mus, variances), axis=1)
    return combine_overflows(overflow_raw(caps, mus, variances), model, axis=1)


def _digit_sums(n_digits: int, k: int, mus: np.ndarray, vs: np.ndarray):
    """Per-bin mean and variance sums of every assignment of ``n_digits`` services."""
    idx = np.arange(k ** n_digits, dtype=np.int64)
    weights = k ** np.arange(n_digits - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // weights[None, :]) % k
    bm = np.empty((len(idx), k))
    bv = np.empty((len(idx), k))
    for j in range(k):
        mask = (digits == j).astype(float)
        bm[:, j] = mask @ mus
        bv[:, j] = mask @ vs
    return bm, bv


def brute_force_integral(instance: Instance, model: CostModel, chunk: int = 1 << 16) -> Partition:
    """Exact minimum over all ``k**n`` assignments.

    Assignments are enumerated in lexicographic order (service 0 most
    significant), so the first minimum is the lexicographically smallest.
    Bin sums are built from a table over the trailing services plus one
    row per assignment of the leading ones. Candidates within a relative
    1e-12 of the vectorized minimum are re-costed with
    :func:`partition_cost` to settle near-ties exactly.
    """
    n, k = instance.n, instance.k
    total = k ** n
    if total > BRUTE_LIMIT:
        raise CapacityError(f"{k}**{n} assignments exceed the brute-force limit of 2**24")
    mus, vs = instance.mus, instance.variances
    caps = instance.capacities
    n_lo = n
    while n_lo > 0 and k ** n_lo > chunk:
        n_lo -= 1
    n_hi = n - n_lo
    lo_m, lo_v = _digit_sums(n_lo, k, mus[n_hi:], vs[n_hi:])
    hi_m, hi_v = _digit_sums(n_hi, k, mus[:n_hi], vs[:n_hi])
    width = len(lo_m)

    def tol(c):
        return 1e-12 * max(abs(c), 1e-300)

    best_cost = math.inf
    cands: list[tuple[int, float]] = []
    for h in range(len(hi_m)):
        costs = np.atleast_1d(_vector_costs(caps, hi_m[h] + lo_m, hi_v[h] + lo_v, model))
        lo = float(costs.min())
        if lo <= best_cost + tol(best_cost):
            keep = np.flatnonzero(costs <= lo + tol(lo))
            cands.extend(zip((h * width + keep).tolist(), costs[keep].tolist()))
            best_cost = min(best_cost, lo)
    cands = [x for x, c in cands if c <= best_cost + tol(best_cost)]

    weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_p, best_c = None, math.inf
    for x in cands:
        p = Partition(tuple(int(d) for d in (x // weights) % k))
        c = partition_cost(instance, p, model)
        if c < best_c:
            best_p, best_c = p, c
    return best_p


# -- error certificate ----------------------------------------------------------------

def _grad_norm(point: NormalizedPoint, ctx: TwoBinContext, model: CostModel) -> float:
    try:
        branches = grad2_branches(point, ctx, model)
    except DomainError:
        return math.inf
    return max(math.hypot(*g) for g in branches)


def error_certificate(instance: Instance, model: CostModel, samples: int = 8) -> ErrorCertificate:
    """Bound on how far the sorting solution can be above the fractional optimum.

    The fractional optimum lies between two consecutive path vertices.
    For each of the two brackets the gradient norm is taken at the
    bracket midpoint (``gradient_bound``) and as the max over ``samples``
    evenly spaced interior points (``conservative_bound``); the smaller
    bracket value times the longest service vector is reported. For the
    expected-deviation model the closed-form bound
    ``mu * (L/n) / (alpha * sqrt(2 pi e))`` is reported as well.
    """
    _require_two_bins(instance)
    sums = _PathSums.build(instance)
    ctx = TwoBinContext.from_instance(instance)
    algo = solve_two_bins(instance, model)
    frac = _fractional(instance, model, sums)

    vecs = service_vectors(instance)
    l_over_n = float(np.max(np.hypot(vecs[:, 0], vecs[:, 1])))
    mu = instance.total_mu
    alpha = (instance.total_capacity - mu) / mu

    s = frac.segment_index
    o1 = _point_on_path(sums, s, 0.0, mu, instance.total_var)
    o2 = _point_on_path(sums, s, 1.0, mu, instance.total_var)
    opt = frac.point

    def bracket(p: NormalizedPoint, q: NormalizedPoint):
        if p == q:
            # zero-length bracket: the vertex is the optimum, the gap is 0
            return 0.0, 0.0
        mid = NormalizedPoint((p.a + q.a) / 2, (p.b + q.b) / 2)
        pts = [
            NormalizedPoint(p.a + (q.a - p.a) * f, p.b + (q.b - p.b) * f)
            for f in (np.arange(samples) + 0.5) / samples
        ]
        return _grad_norm(mid, ctx, model), max(_grad_norm(x, ctx, model) for x in pts)

    mid1, max1 = bracket(o1, opt)
    mid2, max2 = bracket(opt, o2)
    gradient_bound = min(mid1, mid2) * l_over_n
    conservative = min(max1, max2) * l_over_n
    closed = None
    if model is CostModel.SPMED and alpha > 0:
        closed = mu * l_over_n / (alpha * math.sqrt(2.0 * math.pi * math.e))

    reason = []
    if alpha <= 0:
        reason.append("no spare capacity (alpha <= 0)")
    ctx_pts = {"O1": o1, "OPT_f": opt, "O2": o2}
    for name, p in ctx_pts.items():
        m1 = p.a * mu
        if m1 > ctx.c1 or (mu - m1) > ctx.c2:
            reason.append(f"a bin is over capacity at {name}")
    if sums.mu_pre[algo.split_index] > sums.c1 or sums.mu_suf[algo.split_index] > sums.c2:
        reason.append("a bin is over capacity in the sorting solution")

    return ErrorCertificate(
        algorithm_cost=algo.cost,
        fractional_cost=frac.cost,
        gradient_bound=gradient_bound,
        conservative_bound=conservative,
        closed_form_bound=closed,
        L_over_n=l_over_n,
        alpha=alpha,
        applicable=not reason,
        reason="; ".join(reason),
    )


# -- capacity split -----------------------------------------------------------------

def capacity_unbalance_curve(services, total_capacity: float, splits,
                             model: CostModel = CostModel.SPMED) -> list[tuple[float, float]]:
    """Fractional optimum cost for each ``(c1, c2)`` split of a fixed budget.

    Returns ``(c2 - c1, cost)`` pairs sorted by the capacity difference,
    with each split taken as ``c1 <= c2``.
    """
    out = []
    for c1, c2 in splits:
        c1, c2 = sorted((float(c1), float(c2)))
        if not math.isclose(c1 + c2, total_capacity, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"split ({c1}, {c2}) does not sum to {total_capacity}")
        inst = Instance((c1, c2), tuple(services))
        out.append((c2 - c1, solve_fractional_two_bins(inst, model).cost))
    out.sort(key=lambda r: r[0])
    return out
