"""Single-cycle indicators for small configurations and subset counts.

A (k+2)-point configuration carries exactly one potential degree-k cycle:
the boundary of the simplex on its points.  It is present at radius r iff
every leave-one-out subset fits in a ball of diameter r while the full set
does not (strictly).  The cycle is alive on [birth, death) with
birth = twice the largest leave-one-out meb radius and death = twice the
full meb radius; it exists at all iff birth < death.

Counting helpers enumerate candidate subsets of a cloud through the
neighbor graph; all threshold comparisons optionally happen in scaled
units (value / scale) so they agree bitwise with a diagram computed at the
same scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import as_points, pairs_within
from .persistence import Diagram, persistent_betti

__all__ = [
    "BirthDeath",
    "SandwichReport",
    "single_cycle_indicator",
    "facets_indicator",
    "filled_indicator",
    "birth_death",
    "count_alive_cycles",
    "count_isolated_alive_cycles",
    "count_connected_tuples",
    "sandwich_check",
    "cliques_of_size",
    "connected_subsets",
]


def _config(points, k: int | None = None) -> np.ndarray:
    pts = as_points(points)
    if pts.shape[0] < 3:
        raise ValueError(f"a cycle configuration needs at least 3 points, got {pts.shape[0]}")
    if k is not None and pts.shape[0] != k + 2:
        raise ValueError(
            f"degree {k} cycles live on {k + 2} points, got {pts.shape[0]}")
    return pts


def _check_r(r: float) -> float:
    if math.isnan(r) or r < 0:
        raise ValueError(f"radius must be non-negative, got {r}")
    return float(r)


def facets_indicator(points, r: float) -> bool:
    """1 iff every leave-one-out subset fits in a ball of diameter r.

    Non-decreasing in r; r = inf gives 1.
    """
    pts = _config(points)
    r = _check_r(r)
    if math.isinf(r):
        return True
    bd = kernels.birth_death(pts[None])[0]
    return bool(bd[0] <= r)


def filled_indicator(points, r: float) -> bool:
    """1 iff the balls of radius r/2 around all points share a point.

    Non-decreasing in r; r = inf gives 1.
    """
    pts = _config(points)
    r = _check_r(r)
    if math.isinf(r):
        return True
    bd = kernels.birth_death(pts[None])[0]
    return bool(bd[1] <= r)


def single_cycle_indicator(points, r: float) -> bool:
    """1 iff the configuration carries its cycle at radius r.

    Equals facets_indicator - filled_indicator; by convention 0 at r = inf.
    """
    pts = _config(points)
    r = _check_r(r)
    if math.isinf(r):
        return False
    bd = kernels.birth_death(pts[None])[0]
    return bool(bd[0] <= r < bd[1])


@dataclass(frozen=True)
class BirthDeath:
    birth: float
    death: float
    exists: bool


def birth_death(points) -> BirthDeath:
    """Alive interval [birth, death) of the configuration's cycle.

    exists is False when the interval is empty (birth >= death), e.g. for
    obtuse triangles where the enclosing ball rests on the longest edge.
    """
    pts = _config(points)
    b, d = kernels.birth_death(pts[None])[0]
    return BirthDeath(birth=float(b), death=float(d), exists=bool(b < d))


def cliques_of_size(adj: list[set[int]], size: int):
    """All cliques of `size` vertices, ascending vertex tuples."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    n = len(adj)
    if size == 1:
        yield from ((v,) for v in range(n))
        return

    def grow(clique: tuple[int, ...], common: set[int]):
        if len(clique) == size:
            yield clique
            return
        for u in sorted(common):
            if u > clique[-1]:
                yield from grow(clique + (u,), common & adj[u])

    for v in range(n):
        yield from grow((v,), adj[v])


def connected_subsets(adj: list[set[int]], size: int):
    """All vertex subsets of `size` inducing a connected subgraph.

    Ascending vertex tuples.  Standard exact enumeration: grow from each
    root using only larger vertices, extending with exclusive
    neighborhoods so every subset is produced exactly once.
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    n = len(adj)
    if size == 1:
        yield from ((v,) for v in range(n))
        return

    def extend(sub: tuple[int, ...], ext: set[int], root: int, seen: set[int]):
        if len(sub) == size:
            yield tuple(sorted(sub))
            return
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.remove(w)
            new_excl = {u for u in adj[w] if u > root and u not in seen}
            yield from extend(sub + (w,), ext | new_excl, root, seen | new_excl)

    for v in range(n):
        ext0 = {u for u in adj[v] if u > v}
        yield from extend((v,), ext0, v, {v} | ext0)


def _adjacency(pts: np.ndarray, threshold: float, scale: float) -> tuple[list[set[int]], np.ndarray, np.ndarray]:
    """Neighbor sets under the scaled comparison dist/scale <= threshold."""
    edges, dists = pairs_within(pts, threshold * scale * (1.0 + 1e-9))
    keep = (dists / scale) <= threshold
    edges, dists = edges[keep], dists[keep]
    adj: list[set[int]] = [set() for _ in range(pts.shape[0])]
    for i, j in edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))
    return adj, edges, dists


def _candidate_adjacency(pts: np.ndarray, threshold: float, scale: float) -> list[set[int]]:
    """Neighbor sets inflated by a 1e-9 relative slack.

    Candidate enumeration must not lose subsets whose computed birth
    rounds to <= threshold while a pairwise distance sits just above it
    (the enclosing-ball radius carries a ~1e-10 containment tolerance
    for k >= 2).  Callers re-filter on the computed birth/death, so the
    over-inclusion is harmless.
    """
    edges, _ = pairs_within(pts, threshold * scale * (1.0 + 1e-9))
    adj: list[set[int]] = [set() for _ in range(pts.shape[0])]
    for i, j in edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))
    return adj


def _alive_candidates(pts: np.ndarray, k: int, s: float, t: float, scale: float):
    """(k+2)-subsets whose cycle is born by s and alive past t (scaled units)."""
    if not 0 <= s <= t or math.isinf(t):
        raise ValueError(f"need 0 <= s <= t < inf, got s={s}, t={t}")
    adj = _candidate_adjacency(pts, s, scale)
    subsets = list(cliques_of_size(adj, k + 2))
    if not subsets:
        return [], np.empty((0, 2))
    bd = kernels.birth_death(pts[np.asarray(subsets, dtype=np.int64)]) / scale
    alive = (bd[:, 0] <= s) & (bd[:, 1] > t)
    return [sub for sub, ok in zip(subsets, alive) if ok], bd[alive]


def count_alive_cycles(points, k: int, s: float, t: float, scale: float = 1.0) -> int:
    """Number of (k+2)-subsets with cycle birth <= s and death > t.

    Thresholds are in scaled units (physical value / scale); the default
    scale 1 means physical units.  Candidates are cliques of the neighbor
    graph at s: a cycle born by s has all pairwise distances at most s.
    """
    pts = as_points(points)
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    subs, _ = _alive_candidates(pts, k, s, t, scale)
    return len(subs)


def count_isolated_alive_cycles(points, k: int, s: float, t: float,
                                scale: float = 1.0) -> int:
    """Alive (k+2)-subsets with no further cloud point within t of them."""
    pts = as_points(points)
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    subs, _ = _alive_candidates(pts, k, s, t, scale)
    if not subs:
        return 0
    adj_t, _, _ = _adjacency(pts, t, scale)
    count = 0
    for sub in subs:
        members = set(sub)
        if all(adj_t[v] <= members for v in sub):
            count += 1
    return count


def count_connected_tuples(points, k: int, r: float, scale: float = 1.0) -> int:
    """Number of (k+3)-subsets inducing a connected neighbor graph at r."""
    pts = as_points(points)
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    if math.isnan(r) or r < 0:
        raise ValueError(f"threshold must be non-negative, got {r}")
    adj, _, _ = _adjacency(pts, r, scale)
    return sum(1 for _ in connected_subsets(adj, k + 3))


@dataclass(frozen=True)
class SandwichReport:
    lower: int
    betti: int
    upper: int

    @property
    def ok(self) -> bool:
        return self.lower <= self.betti <= self.upper


def sandwich_check(points, k: int, s: float, t: float, diag: Diagram) -> SandwichReport:
    """Bracket the persistent Betti number by small-component counts.

    isolated alive (k+2)-subsets  <=  beta(s, t)  <=  the same count plus
    C(k+3, k+1) times the number of connected (k+3)-subsets at t.  Exact
    integer bounds; s, t in the diagram's scaled units.
    """
    pts = as_points(points)
    betti = persistent_betti(diag, s, t)
    lower = count_isolated_alive_cycles(pts, k, s, t, scale=diag.scale)
    tuples = count_connected_tuples(pts, k, t, scale=diag.scale)
    upper = lower + math.comb(k + 3, k + 1) * tuples
    return SandwichReport(lower=lower, betti=betti, upper=upper)
