import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochpack.model import (
    DimensionError,
    Instance,
    MalformedPartitionError,
    NormalizedPoint,
    PackingError,
    Partition,
    ServiceDemand,
    bin_stats,
    capacity_order,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    dump_instance,
    normalize,
    partition_from_dict,
    sort_by_vmr,
    vmr,
)


def inst(caps, pairs):
    return Instance(tuple(caps), tuple(ServiceDemand(m, v) for m, v in pairs))


def test_service_validation():
    with pytest.raises(PackingError):
        ServiceDemand(-1.0, 1.0)
    with pytest.raises(PackingError):
        ServiceDemand(1.0, 0.0)
    with pytest.warns(UserWarning):
        ServiceDemand(1.0, 4.0)


def test_instance_validation():
    with pytest.raises(PackingError):
        inst([], [(1, 1)])
    with pytest.raises(PackingError):
        inst([1], [])
    with pytest.raises(PackingError):
        inst([-1, 5], [(1, 1)])
    with pytest.raises(PackingError):
        inst([1], [(0, 1)])


def test_vmr():
    assert vmr(ServiceDemand(500, 2500)) == 5.0
    assert vmr(ServiceDemand(0, 1)) == math.inf
    assert vmr(ServiceDemand(160, 6400)) == 40.0


@pytest.mark.parametrize("ratios,order", [
    ([3, 1, 2], [1, 2, 0]),
    ([2, 2, 2], [0, 1, 2]),
    ([1, math.inf, 0.5], [2, 0, 1]),
])
def test_sort_by_vmr(ratios, order):
    pairs = [(0.0, 1.0) if r == math.inf else (10.0, 10.0 * r) for r in ratios]
    assert sort_by_vmr(inst([10], pairs)) == order


def test_bin_stats():
    i = inst([100, 100], [(160, 6400)])
    s = bin_stats(i, Partition((0,)))
    assert s[0].delta == pytest.approx(-0.75)
    assert (s[1].mu, s[1].var, s[1].delta) == (0.0, 0.0, math.inf)
    i2 = inst([100, 100], [(80, 3200), (80, 3200)])
    s = bin_stats(i2, Partition((0, 1)))
    assert s[0].delta == s[1].delta == pytest.approx(20 / math.sqrt(3200))


def test_normalize():
    i = inst([10, 10], [(2, 1), (2, 2)])
    assert normalize(i, Partition((1, 1))) == NormalizedPoint(0.0, 0.0)
    assert normalize(i, Partition((0, 0))) == NormalizedPoint(1.0, 1.0)
    p = normalize(i, Partition((0, 1)))
    assert (p.a, p.b) == (0.5, pytest.approx(1 / 3))
    with pytest.raises(DimensionError):
        normalize(inst([1, 1, 1], [(1, 1)]), Partition((0,)))


def test_partition_validation():
    i = inst([10, 10], [(1, 1), (1, 1)])
    with pytest.raises(MalformedPartitionError):
        Partition((0,)).validate(i)
    with pytest.raises(MalformedPartitionError):
        Partition((0, 2)).validate(i)


def test_json_round_trip(tmp_path):
    i = inst([10.5, 20], [(1, 0.5), (2.25, 1)])
    assert instance_from_dict(json.loads(json.dumps(instance_to_dict(i)))) == i
    path = tmp_path / "i.json"
    dump_instance(i, path)
    assert load_instance(path) == i


def test_json_rejects_unknown_and_missing_fields():
    with pytest.raises(PackingError):
        instance_from_dict({"capacities": [1], "services": [], "extra": 1})
    with pytest.raises(PackingError):
        instance_from_dict({"capacities": [1], "services": [{"mu": 1}]})
    with pytest.raises(PackingError):
        partition_from_dict({"assign": [0]})


def test_capacity_order():
    assert capacity_order([3.0, 1.0, 3.0, 2.0]) == [1, 3, 0, 2]


@given(st.lists(st.tuples(st.floats(0.1, 100), st.floats(0.01, 1.0)), min_size=1, max_size=12),
       st.data())
def test_normalized_point_in_unit_square(pairs, data):
    i = inst([1000, 1000], [(m, (c * m) ** 2) for m, c in pairs])
    a = data.draw(st.lists(st.integers(0, 1), min_size=i.n, max_size=i.n))
    p = normalize(i, Partition(tuple(a)))
    assert 0 <= p.a <= 1 and 0 <= p.b <= 1
