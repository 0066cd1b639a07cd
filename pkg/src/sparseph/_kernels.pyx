# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometric hot kernels.

Mirrors _kernels_py exactly (same support-subset enumeration, same
tolerances); the dispatcher in kernels.py selects this module when it
imported successfully.  Limits: ambient dimension <= 8, <= 12 points per
configuration; the dispatcher routes larger inputs to the numpy lane.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

cdef double RTOL = 1e-10
cdef double ATOL_REL = 1e-26

# ambient dimension <= 8 -> support subsets <= 9 points -> <= 8 unknowns
cdef enum:
    CAP_D = 8
    CAP_M = 12


cdef bint _solve(double A[CAP_D][CAP_D + 1], int n) noexcept nogil:
    """Gauss-Jordan on the n x (n+1) system A, partial pivoting."""
    cdef int col, row, piv, l
    cdef double big, v, f, eps
    eps = 0.0
    for row in range(n):
        for l in range(n):
            v = A[row][l]
            if v < 0:
                v = -v
            if v > eps:
                eps = v
    if eps < 1e-300:
        eps = 1e-300
    eps = eps * 1e-12
    for col in range(n):
        piv = col
        big = A[col][col] if A[col][col] >= 0 else -A[col][col]
        for row in range(col + 1, n):
            v = A[row][col] if A[row][col] >= 0 else -A[row][col]
            if v > big:
                big = v
                piv = row
        if big <= eps:
            return False
        if piv != col:
            for l in range(n + 1):
                v = A[col][l]
                A[col][l] = A[piv][l]
                A[piv][l] = v
        f = A[col][col]
        for l in range(n + 1):
            A[col][l] /= f
        for row in range(n):
            if row == col:
                continue
            f = A[row][col]
            if f != 0.0:
                for l in range(n + 1):
                    A[row][l] -= f * A[col][l]
    return True


cdef double _meb_core(const double* P, int m, int d, int skip, double* center_out) noexcept nogil:
    """Squared meb radius of the points P (m x d), optionally excluding one.

    Exhaustive scan over support subsets of size <= d+1; candidate = the
    smallest ball with the subset on its boundary; answer = smallest valid
    candidate.  center_out (length d) receives the center when non-NULL.
    """
    cdef int idx[CAP_M]
    cdef int sub[CAP_D + 1]
    cdef double mean[CAP_D]
    cdef double c[CAP_D]
    cdef double u[CAP_D][CAP_D]
    cdef double A[CAP_D][CAP_D + 1]
    cdef double x[CAP_D]
    cdef int mm = 0, i, j, l, t, size, maxj, mask, nmask, bit
    cdef double scale2, atol, best, r2, acc, far2, diff
    cdef const double* p0
    cdef const double* pi

    for i in range(m):
        if i != skip:
            idx[mm] = i
            mm += 1

    for t in range(d):
        mean[t] = 0.0
    for i in range(mm):
        pi = P + idx[i] * d
        for t in range(d):
            mean[t] += pi[t]
    for t in range(d):
        mean[t] /= mm
    scale2 = 0.0
    for i in range(mm):
        pi = P + idx[i] * d
        for t in range(d):
            diff = pi[t] - mean[t]
            scale2 += diff * diff
    atol = ATOL_REL * (scale2 if scale2 > 1.0 else 1.0)

    maxj = d + 1 if d + 1 < mm else mm
    best = INFINITY
    nmask = (1 << mm) - 1
    for mask in range(1, nmask + 1):
        size = 0
        bit = mask
        while bit:
            bit &= bit - 1
            size += 1
        if size > maxj:
            continue
        j = 0
        for i in range(mm):
            if mask & (1 << i):
                sub[j] = idx[i]
                j += 1
        if size == 1:
            p0 = P + sub[0] * d
            for t in range(d):
                c[t] = p0[t]
            r2 = 0.0
        elif size == 2:
            p0 = P + sub[0] * d
            pi = P + sub[1] * d
            r2 = 0.0
            for t in range(d):
                c[t] = 0.5 * (p0[t] + pi[t])
                diff = pi[t] - p0[t]
                r2 += diff * diff
            r2 *= 0.25
        else:
            p0 = P + sub[0] * d
            for i in range(size - 1):
                pi = P + sub[i + 1] * d
                for t in range(d):
                    u[i][t] = pi[t] - p0[t]
            for i in range(size - 1):
                for l in range(size - 1):
                    acc = 0.0
                    for t in range(d):
                        acc += u[i][t] * u[l][t]
                    A[i][l] = acc
                A[i][size - 1] = 0.5 * A[i][i]
            if not _solve(A, size - 1):
                continue
            r2 = 0.0
            for t in range(d):
                acc = 0.0
                for i in range(size - 1):
                    acc += A[i][size - 1] * u[i][t]
                x[t] = acc
                r2 += acc * acc
            for t in range(d):
                c[t] = p0[t] + x[t]
        if r2 >= best:
            continue
        far2 = 0.0
        for i in range(mm):
            pi = P + idx[i] * d
            acc = 0.0
            for t in range(d):
                diff = pi[t] - c[t]
                acc += diff * diff
            if acc > far2:
                far2 = acc
        if far2 <= r2 * (1.0 + RTOL) + atol:
            best = r2
            if center_out != NULL:
                for t in range(d):
                    center_out[t] = c[t]
    return best


def meb(points):
    """Minimum enclosing ball of one point set (m, d) -> (center, radius)."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef int m = pts.shape[0], d = pts.shape[1]
    if m > CAP_M or d > CAP_D:
        raise ValueError(f"compiled kernel limits exceeded: m={m}, d={d}")
    center = np.empty(d, dtype=np.float64)
    cdef double[::1] cview = center
    cdef double r2
    with nogil:
        r2 = _meb_core(&pts[0, 0], m, d, -1, &cview[0])
    return center, sqrt(r2)


def meb_radii(batch):
    """Minimum enclosing ball radii for a batch of configs (B, m, d)."""
    cdef double[:, :, ::1] bt = np.ascontiguousarray(batch, dtype=np.float64)
    cdef Py_ssize_t B = bt.shape[0]
    cdef int m = bt.shape[1], d = bt.shape[2]
    if m > CAP_M or d > CAP_D:
        raise ValueError(f"compiled kernel limits exceeded: m={m}, d={d}")
    out = np.empty(B, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t b
    with nogil:
        for b in range(B):
            ov[b] = sqrt(_meb_core(&bt[b, 0, 0], m, d, -1, NULL))
    return out


def birth_death(batch):
    """Per config: [2 * max leave-one-out meb radius, 2 * full meb radius]."""
    cdef double[:, :, ::1] bt = np.ascontiguousarray(batch, dtype=np.float64)
    cdef Py_ssize_t B = bt.shape[0]
    cdef int m = bt.shape[1], d = bt.shape[2]
    if m > CAP_M or d > CAP_D:
        raise ValueError(f"compiled kernel limits exceeded: m={m}, d={d}")
    if m < 3:
        raise ValueError("configurations need at least 3 points")
    out = np.empty((B, 2), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t b
    cdef int i, j, t
    cdef double loo, v, diff
    with nogil:
        for b in range(B):
            loo = 0.0
            if m == 3:
                # leave-one-out sets are pairs: meb radius = half distance
                for i in range(3):
                    for j in range(i + 1, 3):
                        v = 0.0
                        for t in range(d):
                            diff = bt[b, i, t] - bt[b, j, t]
                            v += diff * diff
                        v *= 0.25
                        if v > loo:
                            loo = v
            else:
                for j in range(m):
                    v = _meb_core(&bt[b, 0, 0], m, d, j, NULL)
                    if v > loo:
                        loo = v
            ov[b, 0] = 2.0 * sqrt(loo)
            ov[b, 1] = 2.0 * sqrt(_meb_core(&bt[b, 0, 0], m, d, -1, NULL))
    return out


def connected_within(batch, double r):
    """Whether the graph joining points at distance <= r is connected."""
    cdef double[:, :, ::1] bt = np.ascontiguousarray(batch, dtype=np.float64)
    cdef Py_ssize_t B = bt.shape[0]
    cdef int p = bt.shape[1], d = bt.shape[2]
    if p > CAP_M or d > CAP_D:
        raise ValueError(f"compiled kernel limits exceeded: p={p}, d={d}")
    out = np.empty(B, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ov = out
    cdef Py_ssize_t b
    cdef int i, j, t, full
    cdef unsigned int adj[CAP_M]
    cdef unsigned int visited, frontier, newf
    cdef double acc, diff
    full = (1 << p) - 1
    with nogil:
        for b in range(B):
            for i in range(p):
                adj[i] = 0
            for i in range(p):
                for j in range(i + 1, p):
                    acc = 0.0
                    for t in range(d):
                        diff = bt[b, i, t] - bt[b, j, t]
                        acc += diff * diff
                    if sqrt(acc) <= r:
                        adj[i] |= 1u << j
                        adj[j] |= 1u << i
            visited = 1
            frontier = 1
            while frontier:
                newf = 0
                for i in range(p):
                    if frontier & (1u << i):
                        newf |= adj[i]
                frontier = newf & ~visited
                visited |= frontier
            ov[b] = 1 if visited == <unsigned int>full else 0
    return out.view(bool)
