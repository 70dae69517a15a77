"""Synthetic workloads, empirical cost accounting and the c/mu sweep.

Every random draw comes from a stream keyed by ``(seed, repetition, ...)``
through :class:`numpy.random.SeedSequence`, so results do not depend on the
order in which repetitions or services are processed.
"""

from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import solve_bm
from .costs import CostModel
from .model import DimensionError, InfeasibleError, Instance, Partition, ServiceDemand
from .solver import solve_k_bins_dp, solve_two_bins

VAR_FLOOR = 1e-12
DEFAULT_GRID = tuple(round(1.05 + 0.05 * i, 2) for i in range(10))

_MIXTURE_STREAM = 0
_SAMPLE_STREAM = 1


@dataclass(frozen=True)
class MixtureSpec:
    """Service population: equal means, standard deviations drawn per population.

    Each population is ``(fraction, lo, hi)``; its standard deviations are
    uniform on ``[lo * base_mu, hi * base_mu]``.
    """

    n: int
    base_mu: float = 500.0
    populations: tuple[tuple[float, float, float], ...] = (
        (0.5, 0.0, 0.1),
        (0.25, 0.1, 0.5),
        (0.25, 0.5, 0.9),
    )

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("mixture needs n >= 4")
        if not math.isclose(sum(p[0] for p in self.populations), 1.0):
            raise ValueError("population fractions must sum to 1")

    def counts(self) -> list[int]:
        head = [math.floor(f * self.n) for f, _, _ in self.populations[:-1]]
        return head + [self.n - sum(head)]


@dataclass(frozen=True)
class SweepRow:
    c_over_mu: float
    model: CostModel
    algo: str
    mean_cost: float
    repetitions: int


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)

    def sorted_rows(self) -> list[SweepRow]:
        return sorted(self.rows, key=lambda r: (r.model.value, r.algo, r.c_over_mu))

    def series(self, model: CostModel, algo: str) -> list[tuple[float, float]]:
        return [(r.c_over_mu, r.mean_cost) for r in self.sorted_rows()
                if r.model is model and r.algo == algo]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("c_over_mu,model,algo,mean_cost,repetitions\n")
        for r in self.sorted_rows():
            buf.write(f"{r.c_over_mu:.17g},{r.model.value},{r.algo},{r.mean_cost:.17g},{r.repetitions}\n")
        return buf.getvalue()


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def generate_mixture(spec: MixtureSpec, seed: int, repetition: int = 0) -> np.ndarray:
    """True ``(mu, sigma)`` per service, shape ``(n, 2)``, in shuffled order."""
    rng = _rng(seed, repetition, _MIXTURE_STREAM)
    sigmas = []
    for count, (_, lo, hi) in zip(spec.counts(), spec.populations):
        sigmas.append(rng.uniform(lo * spec.base_mu, hi * spec.base_mu, size=count))
    sigma = np.concatenate(sigmas)
    rng.shuffle(sigma)
    return np.column_stack([np.full(spec.n, spec.base_mu), sigma])


def sample_and_fit(true_params, T: int, seed: int, repetition: int = 0):
    """Draw ``T`` samples per service and fit a normal to each.

    Returns the fitted services (sample mean, unbiased sample variance
    floored at 1e-12) and the ``(n, T)`` sample matrix.
    """
    if T < 2:
        raise ValueError("need at least two timeslots")
    params = np.asarray(true_params, dtype=float)
    samples = np.empty((len(params), T))
    for i, (mu, sigma) in enumerate(params):
        z = _rng(seed, repetition, _SAMPLE_STREAM, i).standard_normal(T)
        samples[i] = mu + sigma * z
    means = np.maximum(samples.mean(axis=1), 0.0)
    variances = np.maximum(samples.var(axis=1, ddof=1), VAR_FLOOR)
    # the widest population reaches sigma = 0.9 mu, so a fitted variance
    # slightly above mu^2 is expected here and not worth a warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        services = tuple(ServiceDemand(float(m), float(v)) for m, v in zip(means, variances))
    return services, samples


def _bin_loads(instance: Instance, partition: Partition, samples: np.ndarray) -> np.ndarray:
    if samples.ndim != 2 or samples.shape[0] != instance.n:
        raise DimensionError(
            f"sample matrix has shape {samples.shape}, expected ({instance.n}, T)"
        )
    partition.validate(instance)
    loads = np.zeros((instance.k, samples.shape[1]))
    for j, members in enumerate(partition.bins(instance.k)):
        if members:
            loads[j] = samples[members].sum(axis=0)
    return loads


def empirical_cost(instance: Instance, partition: Partition, samples: np.ndarray,
                   model: CostModel) -> float:
    """Cost of a partition measured on sampled timeslots.

    Expected deviation is reported as a percent of the total fitted mean,
    averaged over timeslots. The overflow objectives use event frequencies:
    the worst per-bin overflow frequency, and the fraction of timeslots in
    which any bin overflows.
    """
    samples = np.asarray(samples, dtype=float)
    loads = _bin_loads(instance, partition, samples)
    caps = np.asarray(instance.capacities)[:, None]
    if model is CostModel.SPMED:
        excess = np.maximum(0.0, 100.0 * (loads - caps) / instance.total_mu)
        return float(excess.sum(axis=0).mean())
    over = loads > caps
    if model is CostModel.SPMWOP:
        return float(over.mean(axis=1).max())
    return float(over.any(axis=0).mean())


def sorting_partition(instance: Instance, model: CostModel) -> Partition:
    if instance.k == 2:
        return solve_two_bins(instance, model).partition
    return solve_k_bins_dp(instance, model).partition


def _check_grid(grid: Sequence[float]) -> None:
    bad = [c for c in grid if not c >= 1.0]
    if bad:
        raise InfeasibleError(f"c/mu values must be >= 1, got {bad}")


def run_repetition(spec: MixtureSpec, grid: Sequence[float], k: int,
                   models: Sequence[CostModel], seed: int, repetition: int, T: int):
    """Costs of one repetition keyed by ``(c_over_mu, model, algo)``."""
    params = generate_mixture(spec, seed, repetition)
    services, samples = sample_and_fit(params, T, seed, repetition)
    mu = math.fsum(s.mu for s in services)
    out = {}
    for c_over_mu in grid:
        inst = Instance((c_over_mu * mu / k,) * k, services)
        bm = solve_bm(inst)
        for model in models:
            srt = sorting_partition(inst, model)
            out[(c_over_mu, model, "sorting")] = empirical_cost(inst, srt, samples, model)
            out[(c_over_mu, model, "bm")] = empirical_cost(inst, bm, samples, model)
    return out


def _run_repetition_star(args):
    return run_repetition(*args)


def run_sweep(spec: MixtureSpec, c_over_mu_values: Sequence[float], k: int,
              models: Sequence[CostModel], seed: int = 0, repetitions: int = 20,
              T: int = 500, jobs: int = 1) -> SweepReport:
    """Average sorting and BM costs over independently generated workloads.

    Both algorithms are scored on the same samples in every repetition.
    Per-repetition results are summed in repetition order, so the report
    is identical for any ``jobs``.
    """
    grid = [float(c) for c in c_over_mu_values]
    _check_grid(grid)
    models = list(models)
    tasks = [(spec, grid, k, models, seed, r, T) for r in range(repetitions)]
    if jobs > 1 and repetitions > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_repetition_star, tasks))
    else:
        results = [_run_repetition_star(t) for t in tasks]

    report = SweepReport()
    if not results:
        return report
    for key in results[0]:
        total = 0.0
        for res in results:
            total += res[key]
        c_over_mu, model, algo = key
        report.rows.append(SweepRow(c_over_mu, model, algo, total / repetitions, repetitions))
    return report
