"""Numpy implementations of the geometric hot kernels.

Used when the compiled extension is unavailable (or disabled via
SPARSE_PH_PURE_PYTHON=1).  All routines are batched over a leading axis so
the per-call Python overhead amortizes.

The minimum enclosing ball is found by exhaustive scan over candidate
support subsets of size at most d+1: for each subset the smallest ball with
the subset on its boundary (circumcenter restricted to the affine hull) is
computed, and the smallest candidate that contains every input point is the
answer.  Exact for point sets of the sizes used here (at most a few points
above the ambient dimension).
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

# Containment slack: relative on the squared radius, plus an absolute term
# tied to the squared spread so coincident-point configurations stay valid.
_RTOL = 1e-10
_ATOL_REL = 1e-26


def _candidate_balls(sub: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smallest balls with all rows of each config of `sub` on the boundary.

    sub: (B, j, d).  Returns centers (B, d), squared radii (B,), and a
    validity mask (False where the subset is affinely degenerate).
    """
    B, j, d = sub.shape
    if j == 1:
        return sub[:, 0, :].copy(), np.zeros(B), np.ones(B, dtype=bool)
    if j == 2:
        center = 0.5 * (sub[:, 0, :] + sub[:, 1, :])
        diff = sub[:, 1, :] - sub[:, 0, :]
        return center, 0.25 * np.einsum("bd,bd->b", diff, diff), np.ones(B, dtype=bool)
    base = sub[:, 0, :]
    u = sub[:, 1:, :] - base[:, None, :]              # (B, j-1, d)
    gram = np.einsum("bid,bld->bil", u, u)            # (B, j-1, j-1)
    rhs = 0.5 * np.einsum("bii->bi", gram).copy()     # |u_i|^2 / 2
    coef, ok = _solve_gauss(gram, rhs)
    x = np.einsum("bi,bid->bd", coef, u)
    r2 = np.einsum("bd,bd->b", x, x)
    return base + x, r2, ok


def _solve_gauss(G: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss-Jordan solve of G x = h with partial pivoting.

    G: (B, n, n), h: (B, n).  Returns (x, ok); rows of x where ok is False
    are meaningless (singular system).
    """
    B, n = h.shape
    A = np.concatenate([G, h[:, :, None]], axis=2)
    eps = 1e-12 * np.maximum(np.abs(G).max(axis=(1, 2)), 1e-300)
    ok = np.ones(B, dtype=bool)
    rows = np.arange(B)
    for col in range(n):
        piv = np.argmax(np.abs(A[:, col:, col]), axis=1) + col
        ok &= np.abs(A[rows, piv, col]) > eps
        tmp = A[rows, col, :].copy()
        A[rows, col, :] = A[rows, piv, :]
        A[rows, piv, :] = tmp
        pivot = A[:, col, col]
        pivot = np.where(np.abs(pivot) > 0, pivot, 1.0)
        pivrow = A[:, col, :] / pivot[:, None]
        fac = A[:, :, col].copy()
        fac[:, col] = 0.0
        A -= fac[:, :, None] * pivrow[:, None, :]
        A[:, col, :] = pivrow
    return A[:, :, n], ok


def _meb_batch(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centers (B, d) and squared radii (B,) of minimum enclosing balls."""
    B, m, d = batch.shape
    spread = batch - batch.mean(axis=1, keepdims=True)
    scale2 = np.einsum("bmd,bmd->b", spread, spread)
    atol = _ATOL_REL * np.maximum(scale2, 1.0)
    best_r2 = np.full(B, np.inf)
    best_c = np.empty((B, d))
    max_support = min(d + 1, m)
    for j in range(1, max_support + 1):
        for idx in combinations(range(m), j):
            center, r2, ok = _candidate_balls(batch[:, idx, :])
            diff = batch - center[:, None, :]
            far2 = np.einsum("bmd,bmd->bm", diff, diff).max(axis=1)
            valid = ok & (far2 <= r2 * (1.0 + _RTOL) + atol) & (r2 < best_r2)
            best_r2 = np.where(valid, r2, best_r2)
            best_c = np.where(valid[:, None], center, best_c)
    return best_c, best_r2


def meb(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum enclosing ball of one point set (m, d) -> (center, radius)."""
    pts = np.asarray(points, dtype=np.float64)
    center, r2 = _meb_batch(pts[None, :, :])
    return center[0], float(np.sqrt(r2[0]))


def meb_radii(batch: np.ndarray) -> np.ndarray:
    """Minimum enclosing ball radii for a batch of configs (B, m, d)."""
    _, r2 = _meb_batch(np.asarray(batch, dtype=np.float64))
    return np.sqrt(r2)


def birth_death(batch: np.ndarray) -> np.ndarray:
    """Per config: [2 * max leave-one-out meb radius, 2 * full meb radius].

    batch: (B, m, d) with m >= 3.  Leave-one-out sets of size 2 reduce to
    pairwise half-distances, which is the dominant case (m = 3).
    """
    batch = np.asarray(batch, dtype=np.float64)
    B, m, d = batch.shape
    _, full_r2 = _meb_batch(batch)
    if m == 3:
        diffs = batch[:, [1, 2, 0], :] - batch
        loo_r2 = 0.25 * np.einsum("bmd,bmd->bm", diffs, diffs).max(axis=1)
    else:
        loo_r2 = np.zeros(B)
        keep = np.arange(m)
        for drop in range(m):
            _, r2 = _meb_batch(batch[:, keep != drop, :])
            loo_r2 = np.maximum(loo_r2, r2)
    out = np.empty((B, 2))
    out[:, 0] = 2.0 * np.sqrt(loo_r2)
    out[:, 1] = 2.0 * np.sqrt(full_r2)
    return out


def connected_within(batch: np.ndarray, r: float) -> np.ndarray:
    """Whether the graph joining points at distance <= r is connected.

    batch: (B, p, d).  Closed threshold, matching the neighbor graph.
    """
    batch = np.asarray(batch, dtype=np.float64)
    B, p, d = batch.shape
    diff = batch[:, :, None, :] - batch[:, None, :, :]
    dist = np.sqrt(np.einsum("bijd,bijd->bij", diff, diff))
    adj = dist <= r
    reach = adj[:, 0, :].copy()
    for _ in range(p - 1):
        reach = np.einsum("bi,bij->bj", reach, adj) > 0
    return reach.all(axis=1)
