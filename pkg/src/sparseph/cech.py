"""Truncated Cech filtrations.

A subset spans a simplex once the balls of radius r/2 around its points
share a point, i.e. at filtration value twice the minimum enclosing ball
radius.  Simplices are enumerated as cliques of the neighbor graph at the
truncation cutoff (a subset with value <= cutoff is pairwise within cutoff,
so no simplex is missed), and the complex is truncated at dimension k+1:
degree-k homology only needs the (k+1)-skeleton.

Values are clamped from below by the maximum face value.  The clamp is at
most one ulp of rounding noise (a face ball never exceeds the enclosing
ball of the full simplex) and guarantees that sorting by (value, dimension,
vertices) is a valid filtration order even for degenerate configurations
such as right triangles, where the killing simplex appears exactly with its
longest face.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import as_points, pairs_within

__all__ = ["FilteredComplex", "build_filtration", "complex_at", "save_complex_csv"]


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices sorted by (value, dimension, lexicographic vertices)."""

    d: int
    max_dim: int
    cutoff: float
    n_points: int
    simplices: tuple[tuple[tuple[int, ...], float], ...]
    _values: np.ndarray = field(repr=False, compare=False)

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    def by_dim(self, dim: int) -> list[tuple[tuple[int, ...], float]]:
        """Simplices of one dimension, in filtration order."""
        return [s for s in self.simplices if len(s[0]) == dim + 1]

    def count_at(self, dim: int, r: float) -> int:
        return sum(1 for verts, val in self.simplices
                   if len(verts) == dim + 1 and val <= r)


def build_filtration(points, k: int, cutoff: float) -> FilteredComplex:
    """Cech filtration of `points` up to dimension k+1, truncated at cutoff.

    Args:
        points: (n, d) array of coordinates.
        k: homology degree of interest, >= 1; simplices up to dimension k+1
            are built.
        cutoff: truncation value, > 0; simplices with value <= cutoff are
            kept (closed threshold).
    """
    pts = as_points(points)
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    if not (cutoff > 0 and np.isfinite(cutoff)):
        raise ValueError(f"cutoff must be positive and finite, got {cutoff}")
    n = pts.shape[0]
    max_dim = k + 1

    simplices: list[tuple[tuple[int, ...], float]] = [((i,), 0.0) for i in range(n)]
    edges, dists = pairs_within(pts, cutoff)
    adj: list[set[int]] = [set() for _ in range(n)]
    values: dict[tuple[int, ...], float] = {}
    for (i, j), dist in zip(edges, dists):
        i, j = int(i), int(j)
        adj[i].add(j)
        adj[j].add(i)
        values[(i, j)] = float(dist)
    simplices.extend((verts, val) for verts, val in values.items())

    level = list(values.keys())
    for dim in range(2, max_dim + 1):
        candidates = []
        for verts in level:
            common = adj[verts[0]]
            for v in verts[1:]:
                common = common & adj[v]
            last = verts[-1]
            for u in sorted(c for c in common if c > last):
                candidates.append(verts + (u,))
        if not candidates:
            break
        coords = pts[np.asarray(candidates, dtype=np.int64)]
        raw = 2.0 * kernels.meb_radii(coords)
        next_level = []
        for verts, val in zip(candidates, raw):
            val = float(val)
            for drop in range(len(verts)):
                face = verts[:drop] + verts[drop + 1:]
                fval = values.get(face)
                if fval is None:
                    # face already beyond the cutoff, so this is too
                    val = math.inf
                    break
                if fval > val:
                    val = fval
            if val <= cutoff:
                values[verts] = val
                next_level.append(verts)
                simplices.append((verts, val))
        level = next_level

    simplices.sort(key=lambda s: (s[1], len(s[0]), s[0]))
    vals = np.array([v for _, v in simplices]) if simplices else np.empty(0)
    return FilteredComplex(
        d=pts.shape[1],
        max_dim=max_dim,
        cutoff=float(cutoff),
        n_points=n,
        simplices=tuple(simplices),
        _values=vals,
    )


def complex_at(fc: FilteredComplex, r: float) -> list[tuple[tuple[int, ...], float]]:
    """Simplices present at radius r (value <= r), in filtration order."""
    if r > fc.cutoff:
        raise ValueError(
            f"radius {r} is beyond truncation (cutoff {fc.cutoff}); rebuild with a larger cutoff")
    stop = bisect.bisect_right(fc._values, r)
    return list(fc.simplices[:stop])


def save_complex_csv(fc: FilteredComplex, path) -> None:
    """One row per simplex: dim,value,v0,v1,..."""
    with open(path, "w", encoding="ascii") as fh:
        for verts, val in fc.simplices:
            fh.write(f"{len(verts) - 1},{val:.17g}," + ",".join(map(str, verts)) + "\n")
