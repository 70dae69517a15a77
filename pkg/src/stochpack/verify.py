"""Randomized self-checks behind ``stochpack verify``.

Each suite draws ``trials`` random cases and returns a list of failure
messages. Suites look up the solvers through this module's globals, so a
test can monkeypatch one of them and watch the harness fail.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .costs import (
    CostModel,
    TwoBinContext,
    cost2_ab,
    deltas2,
    grad2_spmed,
    hessian2_spmed,
    partition_cost,
)
from .geometry import build_sorted_paths, contains_many, enumerate_integral_points
from .model import Instance, NormalizedPoint, ServiceDemand
from .solver import capacity_unbalance_curve, exhaustive_consecutive_cuts, solve_k_bins_dp

MODELS = tuple(CostModel)


def random_services(rng: np.random.Generator, n: int, cv=(0.05, 0.9)) -> tuple[ServiceDemand, ...]:
    mus = rng.uniform(1.0, 100.0, size=n)
    sig = rng.uniform(*cv, size=n) * mus
    return tuple(ServiceDemand(float(m), float(s * s)) for m, s in zip(mus, sig))


def random_instance(rng: np.random.Generator, n: int, k: int = 2,
                    alpha=(0.1, 0.6), cv=(0.05, 0.9)) -> Instance:
    """Random feasible instance with relative spare capacity drawn from ``alpha``."""
    services = random_services(rng, n, cv)
    total = math.fsum(s.mu for s in services) * (1.0 + rng.uniform(*alpha))
    w = rng.uniform(0.5, 1.5, size=k)
    return Instance(tuple(float(x) for x in total * w / w.sum()), services)


def random_ctx(rng: np.random.Generator) -> TwoBinContext:
    mu = rng.uniform(50.0, 1000.0)
    sigma = mu * rng.uniform(0.05, 0.5)
    total = mu * rng.uniform(1.05, 1.6)
    f = rng.uniform(0.2, 0.5)
    return TwoBinContext.of(f * total, (1.0 - f) * total, mu, sigma * sigma)


def rel_err(x, y, floor: float = 1e-12) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return float(np.linalg.norm(x - y) / max(np.linalg.norm(y), floor))


def fd_grad(ctx: TwoBinContext, model: CostModel, a: float, b: float, h: float = 1e-6):
    da = (cost2_ab(a + h, b, ctx, model) - cost2_ab(a - h, b, ctx, model)) / (2 * h)
    db = (cost2_ab(a, b + h, ctx, model) - cost2_ab(a, b - h, ctx, model)) / (2 * h)
    return np.array([da, db])


def fd_hessian(ctx: TwoBinContext, a: float, b: float, h: float = 1e-5) -> np.ndarray:
    def g(x, y):
        return np.array(grad2_spmed(NormalizedPoint(x, y), ctx))
    ca = (g(a + h, b) - g(a - h, b)) / (2 * h)
    cb = (g(a, b + h) - g(a, b - h)) / (2 * h)
    return np.column_stack([ca, cb])


# -- suites --------------------------------------------------------------------

def suite_epigraph(rng, trials: int, n_max: int) -> list[str]:
    fails = []
    for t in range(trials):
        inst = random_instance(rng, int(rng.integers(1, min(n_max, 12) + 1)))
        bottom, upper = build_sorted_paths(inst)
        inside = contains_many(bottom, upper, enumerate_integral_points(inst))
        if not inside.all():
            fails.append(f"trial {t}: {int((~inside).sum())} integral points outside the polygon")
    return fails


def suite_dp(rng, trials: int, n_max: int) -> list[str]:
    fails = []
    for t in range(trials):
        k = 2 + t % 4
        n = int(rng.integers(1, min(n_max, 10) + 1))
        inst = random_instance(rng, n, k)
        model = MODELS[t % 3]
        dp = solve_k_bins_dp(inst, model)
        ex = exhaustive_consecutive_cuts(inst, model)
        recomputed = partition_cost(inst, dp.partition, model)
        if abs(dp.cost - ex.cost) > 1e-12 or abs(recomputed - dp.cost) > 1e-12:
            fails.append(f"trial {t}: {model.value} k={k} n={n} dp={dp.cost!r} exhaustive={ex.cost!r}")
    return fails


def random_fd_point(rng, max_delta: float = 6.0):
    """Random context and interior point where both bins are within ``max_delta`` std.

    Further out the curvature drops below what central differences of an
    O(mu) gradient can resolve in double precision.
    """
    while True:
        ctx = random_ctx(rng)
        a, b = rng.uniform(0.05, 0.95, size=2)
        if max(abs(d) for d in deltas2(a, b, ctx)) <= max_delta:
            return ctx, NormalizedPoint(float(a), float(b))


def suite_gradient(rng, trials: int, n_max: int) -> list[str]:
    fails = []
    for t in range(trials):
        ctx, p = random_fd_point(rng)
        eg = rel_err(grad2_spmed(p, ctx), fd_grad(ctx, CostModel.SPMED, p.a, p.b), ctx.sigma * 1e-6)
        eh = rel_err(hessian2_spmed(p, ctx), fd_hessian(ctx, p.a, p.b), ctx.sigma * 1e-6)
        if eg > 1e-5 or eh > 1e-4:
            fails.append(f"trial {t}: gradient rel err {eg:.3g}, hessian rel err {eh:.3g}")
    return fails


def suite_symmetry(rng, trials: int, n_max: int) -> list[str]:
    fails = []
    ticks = np.linspace(0.0, 1.0, 11)
    aa, bb = np.meshgrid(ticks, ticks)
    for t in range(trials):
        ctx = random_ctx(rng)
        for model in MODELS:
            lhs = cost2_ab(aa, bb, ctx, model)
            rhs = cost2_ab(1.0 - aa - ctx.shift, 1.0 - bb, ctx, model)
            err = float(np.max(np.abs(lhs - rhs)))
            if err > 1e-10 * max(1.0, ctx.sigma):
                fails.append(f"trial {t}: {model.value} symmetry error {err:.3g}")
    return fails


def suite_unbalance(rng, trials: int, n_max: int) -> list[str]:
    fails = []
    for t in range(trials):
        services = random_services(rng, int(rng.integers(2, max(2, n_max) + 1)))
        c = math.fsum(s.mu for s in services) * rng.uniform(1.1, 1.6)
        lows = [c / 2 * (1 - i / 9) for i in range(10)]
        splits = [(lo, c - lo) for lo in lows]
        costs = [v for _, v in capacity_unbalance_curve(services, c, splits)]
        slack = 1e-9 * max(costs)
        if any(y > x + slack for x, y in zip(costs, costs[1:])):
            fails.append(f"trial {t}: cost increases as capacities become unbalanced")
    return fails


SUITES: dict[str, Callable] = {
    "epigraph": suite_epigraph,
    "dp": suite_dp,
    "gradient": suite_gradient,
    "symmetry": suite_symmetry,
    "unbalance": suite_unbalance,
}


def run_suites(trials: int, n_max: int, seed: int, suites=None):
    """Run every suite; yields ``(name, failures)`` pairs."""
    suites = SUITES if suites is None else suites
    for i, (name, fn) in enumerate(suites.items()):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        yield name, fn(rng, trials, n_max)
