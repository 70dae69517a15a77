"""Balanced Mean (BM): the comparison heuristic used in the experiments."""

from .model import Instance, PackingError, Partition


def solve_bm(instance: Instance) -> Partition:
    """Assign services in input order, each to the bin with the most mean slack.

    Slack is ``c_j`` minus the means already placed in bin ``j``; ties go
    to the lowest bin index. Variances are ignored.
    """
    if instance.k < 2:
        raise PackingError("BM needs at least two bins")
    slack = list(instance.capacities)
    out = []
    for s in instance.services:
        j = max(range(instance.k), key=lambda b: (slack[b], -b))
        slack[j] -= s.mu
        out.append(j)
    return Partition(tuple(out))
