import math

import numpy as np
import pytest

from stochpack.costs import CostModel, partition_cost
from stochpack.model import DimensionError, InfeasibleError, Instance, Partition
from stochpack.sim import (
    DEFAULT_GRID,
    MixtureSpec,
    empirical_cost,
    generate_mixture,
    run_repetition,
    run_sweep,
    sample_and_fit,
)

MODELS = list(CostModel)


def test_mixture_counts_and_ranges():
    spec = MixtureSpec(100)
    assert spec.counts() == [50, 25, 25]
    assert MixtureSpec(7).counts() == [3, 1, 3]
    p = generate_mixture(spec, seed=1)
    assert p.shape == (100, 2)
    assert np.all(p[:, 0] == 500)
    assert np.all((p[:, 1] >= 0) & (p[:, 1] <= 0.9 * 500))
    assert np.sum(p[:, 1] <= 50) >= 50


def test_mixture_deterministic_and_shuffled():
    a = generate_mixture(MixtureSpec(40), seed=3, repetition=2)
    b = generate_mixture(MixtureSpec(40), seed=3, repetition=2)
    c = generate_mixture(MixtureSpec(40), seed=3, repetition=3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    # a sorted-by-population layout would put all small sigmas first
    assert not np.all(np.diff((a[:, 1] > 50).astype(int)) >= 0)


def test_mixture_validation():
    with pytest.raises(ValueError):
        MixtureSpec(3)
    with pytest.raises(ValueError):
        MixtureSpec(10, populations=((0.5, 0, 1), (0.2, 0, 1)))


def test_sample_and_fit_deterministic():
    params = generate_mixture(MixtureSpec(8), seed=0)
    s1, x1 = sample_and_fit(params, 50, seed=4)
    s2, x2 = sample_and_fit(params, 50, seed=4)
    assert np.array_equal(x1, x2) and s1 == s2
    assert x1.shape == (8, 50)
    assert s1[0].mu == pytest.approx(x1[0].mean())
    assert s1[0].var == pytest.approx(x1[0].var(ddof=1))


def test_sample_streams_independent_of_service_count():
    params = generate_mixture(MixtureSpec(8), seed=0)
    _, full = sample_and_fit(params, 30, seed=4)
    _, head = sample_and_fit(params[:3], 30, seed=4)
    assert np.array_equal(full[:3], head)


def test_fit_converges():
    params = np.array([[500.0, 100.0], [500.0, 400.0]])
    T = 1_000_000
    services, _ = sample_and_fit(params, T, seed=0)
    for (mu, sigma), s in zip(params, services):
        assert abs(s.mu - mu) <= 5 * sigma / math.sqrt(T)


def test_variance_floor():
    services, _ = sample_and_fit([[10.0, 0.0]], 5, seed=0)
    assert services[0].var == 1e-12


def test_needs_two_timeslots():
    with pytest.raises(ValueError):
        sample_and_fit([[1.0, 1.0]], 1, seed=0)


def test_empirical_cost_trivial_cases():
    i = Instance.from_arrays([1e9, 1e9], [1, 1], [1, 1])
    x = np.ones((2, 10))
    for model in MODELS:
        assert empirical_cost(i, Partition((0, 1)), x, model) == 0.0
    one = Instance.from_arrays([100.0], [100.0], [4.0])
    x = np.full((1, 7), 101.0)
    assert empirical_cost(one, Partition((0,)), x, CostModel.SPMED) == pytest.approx(1.0)
    assert empirical_cost(one, Partition((0,)), x, CostModel.SPMWOP) == 1.0
    assert empirical_cost(one, Partition((0,)), x, CostModel.SPMOP) == 1.0


def test_overflow_frequencies():
    i = Instance.from_arrays([10, 10], [5, 5], [1, 1])
    x = np.array([[11, 0, 11, 0], [0, 11, 0, 0]], dtype=float)
    p = Partition((0, 1))
    assert empirical_cost(i, p, x, CostModel.SPMWOP) == 0.5
    assert empirical_cost(i, p, x, CostModel.SPMOP) == 0.75


def test_dimension_mismatch():
    i = Instance.from_arrays([10, 10], [5, 5], [1, 1])
    with pytest.raises(DimensionError):
        empirical_cost(i, Partition((0, 1)), np.ones((3, 4)), CostModel.SPMED)


def test_empirical_matches_closed_form():
    rng = np.random.default_rng(0)
    params = np.column_stack([rng.uniform(40, 60, 6), rng.uniform(5, 20, 6)])
    T = 100_000
    services, x = sample_and_fit(params, T, seed=9)
    true = Instance.from_arrays([150, 170], params[:, 0], params[:, 1] ** 2)
    p = Partition((0, 0, 0, 1, 1, 1))
    loads = np.vstack([x[:3].sum(axis=0), x[3:].sum(axis=0)])
    per_slot = 100 * np.maximum(loads - np.array([[150], [170]]), 0).sum(axis=0) / true.total_mu
    emp = empirical_cost(Instance([150, 170], services), p, x, CostModel.SPMED)
    # empirical percent uses the fitted total mean; rescale to the true one
    emp_true = emp * Instance([150, 170], services).total_mu / true.total_mu
    exact = 100 * partition_cost(true, p, CostModel.SPMED) / true.total_mu
    se = per_slot.std() / math.sqrt(T)
    assert abs(emp_true - exact) <= 3 * se


def test_sweep_report_format():
    r = run_sweep(MixtureSpec(12), [1.1, 1.3], 2, MODELS, seed=1, repetitions=2, T=50)
    lines = r.to_csv().splitlines()
    assert lines[0] == "c_over_mu,model,algo,mean_cost,repetitions"
    assert len(lines) == 1 + 3 * 2 * 2
    keys = [(l.split(",")[1], l.split(",")[2], float(l.split(",")[0])) for l in lines[1:]]
    assert keys == sorted(keys)
    assert all(l.endswith(",2") for l in lines[1:])


def test_sweep_is_average_of_repetitions():
    spec = MixtureSpec(10)
    full = run_sweep(spec, [1.1], 2, [CostModel.SPMED], seed=5, repetitions=3, T=40)
    per_rep = [run_repetition(spec, [1.1], 2, [CostModel.SPMED], 5, r, 40) for r in range(3)]
    for row in full.rows:
        vals = [res[(1.1, CostModel.SPMED, row.algo)] for res in per_rep]
        assert row.repetitions == 3
        assert row.mean_cost == pytest.approx(sum(vals) / 3, rel=1e-15)


def test_sweep_rejects_infeasible_grid():
    with pytest.raises(InfeasibleError):
        run_sweep(MixtureSpec(10), [0.9, 1.1], 2, MODELS, seed=0, repetitions=1, T=10)


def test_sweep_parallel_identical():
    args = (MixtureSpec(16), [1.05, 1.2], 3, MODELS)
    a = run_sweep(*args, seed=2, repetitions=4, T=60, jobs=1).to_csv()
    b = run_sweep(*args, seed=2, repetitions=4, T=60, jobs=3).to_csv()
    assert a == b


def test_default_grid():
    assert DEFAULT_GRID[0] == 1.05 and DEFAULT_GRID[-1] == 1.5 and len(DEFAULT_GRID) == 10
