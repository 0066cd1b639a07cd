"""Dense GF(2) linear algebra for the rank-based persistence oracle.

Matrices are numpy uint8 arrays holding 0/1 entries; XOR row operations do
the elimination.  Intended for the small complexes the oracle runs on, not
for the main reduction pipeline.
"""

from __future__ import annotations

import numpy as np

__all__ = ["rank", "kernel_basis"]


def _rref(M: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Reduced row-echelon form over GF(2); returns (matrix, pivot (row, col) list)."""
    A = (np.ascontiguousarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = A.shape
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(A[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        if others.size:
            A[others] ^= A[r]
        pivots.append((r, c))
        r += 1
    return A, pivots


def rank(M: np.ndarray) -> int:
    """Rank over GF(2).  Empty matrices have rank 0."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if 0 in M.shape:
        return 0
    return len(_rref(M)[1])


def kernel_basis(M: np.ndarray) -> np.ndarray:
    """Basis of the null space over GF(2), as columns of a uint8 matrix.

    M maps GF(2)^cols -> GF(2)^rows; the result has shape (cols, nullity).
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.uint8)
    if rows == 0:
        return np.eye(cols, dtype=np.uint8)
    A, pivots = _rref(M)
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(cols) if c not in pivot_cols]
    basis = np.zeros((cols, len(free)), dtype=np.uint8)
    for idx, f in enumerate(free):
        basis[f, idx] = 1
        for r, c in pivots:
            basis[c, idx] = A[r, f]
    return basis
