"""Elementary geometric operations shared by every layer above.

The metric is the Euclidean norm computed as sqrt of the summed squared
coordinate differences; all threshold comparisons are raw IEEE `<=` on that
value, with no tolerance, so that every module agrees about which pairs are
neighbors.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from . import kernels

__all__ = [
    "min_enclosing_ball",
    "simplex_value",
    "neighbor_graph",
    "pairs_within",
    "as_points",
]

# below this many points a dense distance pass beats building a tree
_BRUTE_CUTOVER = 128


def as_points(points, d: int | None = None) -> np.ndarray:
    """Validate and convert to a float64 (m, d) array."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim == 1 and pts.size == 0:
        pts = pts.reshape(0, d if d else 0)
    if pts.ndim != 2:
        raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
    if d is not None and pts.shape[1] != d:
        raise ValueError(f"expected ambient dimension {d}, got {pts.shape[1]}")
    if pts.size and not np.isfinite(pts).all():
        raise ValueError("points contain NaN or infinite coordinates")
    return pts


def min_enclosing_ball(points) -> tuple[np.ndarray, float]:
    """Center and radius of the smallest ball containing all points.

    Exhaustive support-subset scan; exact for the small point sets used
    throughout (tuples of at most a few more points than the dimension).
    """
    pts = as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("minimum enclosing ball of an empty set is undefined")
    return kernels.meb(pts)


def simplex_value(points) -> float:
    """Cech filtration value of the simplex on `points`: the smallest r
    such that balls of radius r/2 around the points intersect, i.e. twice
    the minimum enclosing ball radius.  Vertices get 0, edges their length.
    """
    pts = as_points(points)
    if pts.shape[0] == 1:
        return 0.0
    _, radius = kernels.meb(pts)
    return 2.0 * radius


def pairs_within(points, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i < j) at distance <= threshold and their distances.

    Pairs are sorted lexicographically.  A kd-tree restricts the candidate
    set for large inputs; membership is always decided by the canonical
    distance comparison.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if threshold < 0 or not np.isfinite(threshold):
        raise ValueError(f"threshold must be finite and non-negative, got {threshold}")
    if n < 2:
        return np.empty((0, 2), dtype=np.int64), np.empty(0)
    if n <= _BRUTE_CUTOVER:
        ii, jj = np.triu_indices(n, k=1)
    else:
        tree = cKDTree(pts)
        cand = tree.query_pairs(threshold * (1.0 + 1e-9) + 1e-300, output_type="ndarray")
        if cand.shape[0] == 0:
            return np.empty((0, 2), dtype=np.int64), np.empty(0)
        ii, jj = np.minimum(cand[:, 0], cand[:, 1]), np.maximum(cand[:, 0], cand[:, 1])
    diff = pts[ii] - pts[jj]
    dist = np.sqrt(np.einsum("ed,ed->e", diff, diff))
    keep = dist <= threshold
    edges = np.stack([ii[keep], jj[keep]], axis=1).astype(np.int64)
    dist = dist[keep]
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order], dist[order]


def neighbor_graph(points, threshold: float) -> list[np.ndarray]:
    """Adjacency lists of the graph joining points at distance <= threshold.

    Returns one sorted int64 array of neighbors per point.
    """
    pts = as_points(points)
    n = pts.shape[0]
    edges, _ = pairs_within(pts, threshold)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    return [np.array(sorted(a), dtype=np.int64) for a in adj]
