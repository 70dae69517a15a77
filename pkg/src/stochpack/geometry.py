"""Sorted paths, integral points and the cost-surface grid export."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costs import CostModel, TwoBinContext, cost2_ab, saddle_point, valley_a
from .model import CapacityError, Instance, NormalizedPoint, service_vectors, sort_by_vmr

MAX_ENUMERATE = 20


class Orientation(enum.Enum):
    BOTTOM = "bottom"
    UPPER = "upper"


@dataclass(frozen=True)
class SortedPath:
    points: tuple[NormalizedPoint, ...]
    orientation: Orientation

    def as_array(self) -> np.ndarray:
        return np.array([(p.a, p.b) for p in self.points], dtype=float)


def path_vertices(instance: Instance, order: Sequence[int]) -> np.ndarray:
    """Prefix sums of the normalized service vectors taken in ``order``.

    Returns an ``(n + 1, 2)`` array starting at the origin. The last row
    is pinned to ``(1, 1)`` exactly.
    """
    vecs = service_vectors(instance)[list(order)]
    pts = np.vstack([np.zeros((1, 2)), np.cumsum(vecs, axis=0)])
    pts[-1] = (1.0, 1.0)
    return pts


def _to_path(pts: np.ndarray, orientation: Orientation) -> SortedPath:
    return SortedPath(tuple(NormalizedPoint(float(a), float(b)) for a, b in pts), orientation)


def build_sorted_paths(instance: Instance) -> tuple[SortedPath, SortedPath]:
    """Bottom (ascending VMR) and upper (descending VMR) sorted paths."""
    order = sort_by_vmr(instance)
    bottom = path_vertices(instance, order)
    # the upper path is the point reflection of the bottom one
    upper = path_vertices(instance, order[::-1])
    return _to_path(bottom, Orientation.BOTTOM), _to_path(upper, Orientation.UPPER)


def enumerate_integral_points(instance: Instance) -> np.ndarray:
    """All ``2**n`` subset points as a ``(2**n, 2)`` array.

    Row ``m`` is the point of the subset whose members are the set bits
    of ``m`` (bit ``i`` is service ``i``).
    """
    n = instance.n
    if n > MAX_ENUMERATE:
        raise CapacityError(f"refusing to enumerate 2**{n} subsets (limit n <= {MAX_ENUMERATE})")
    vecs = service_vectors(instance)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    return bits @ vecs


def _envelope(path: SortedPath, lower: bool):
    pts = path.as_array()
    a = pts[:, 0]
    # repeated abscissae come from zero-mean services (vertical steps);
    # keep the lowest b for the bottom boundary and the highest for the top
    if lower:
        xs, idx = np.unique(a, return_index=True)
    else:
        rev = a[::-1]
        xs, ridx = np.unique(rev, return_index=True)
        idx = len(a) - 1 - ridx
    return xs, pts[idx, 1]


def contains_many(bottom: SortedPath, upper: SortedPath, points, tol: float = 1e-9) -> np.ndarray:
    """Vectorized :func:`contains` over an ``(m, 2)`` array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = pts[:, 0], pts[:, 1]
    xs_lo, ys_lo = _envelope(bottom, lower=True)
    xs_hi, ys_hi = _envelope(upper, lower=False)
    ac = np.clip(a, 0.0, 1.0)
    lo = np.interp(ac, xs_lo, ys_lo)
    hi = np.interp(ac, xs_hi, ys_hi)
    in_a = (a >= -tol) & (a <= 1.0 + tol)
    return in_a & (b >= lo - tol) & (b <= hi + tol)


def contains(bottom: SortedPath, upper: SortedPath, p: NormalizedPoint, tol: float = 1e-9) -> bool:
    """Whether ``p`` lies between the bottom and upper sorted paths."""
    return bool(contains_many(bottom, upper, [(p.a, p.b)], tol)[0])


# -- cost surface export ---------------------------------------------------------

def cost_grid_rows(ctx: TwoBinContext, model: CostModel, resolution: int):
    """Rows ``(a, b, cost, tag)`` of the cost surface.

    A uniform ``resolution x resolution`` grid over the unit square
    ordered by ``(b, a)``, followed by valley samples at every interior
    grid ordinate and the saddle point.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    ticks = np.linspace(0.0, 1.0, resolution)
    bb, aa = np.meshgrid(ticks, ticks, indexing="ij")
    costs = cost2_ab(aa.ravel(), bb.ravel(), ctx, model)
    rows = [
        (float(a), float(b), float(c), "grid")
        for a, b, c in zip(aa.ravel(), bb.ravel(), np.atleast_1d(costs))
    ]
    for b in ticks[1:-1]:
        a = valley_a(float(b), ctx, model)
        rows.append((a, float(b), float(cost2_ab(a, b, ctx, model)), "valley"))
    s = saddle_point(ctx)
    rows.append((s.a, s.b, float(cost2_ab(s.a, s.b, ctx, model)), "saddle"))
    return rows


def export_cost_grid(ctx: TwoBinContext, model: CostModel, resolution: int) -> str:
    buf = io.StringIO()
    buf.write("a,b,cost,tag\n")
    for a, b, c, tag in cost_grid_rows(ctx, model, resolution):
        buf.write(f"{a:.17g},{b:.17g},{c:.17g},{tag}\n")
    return buf.getvalue()
