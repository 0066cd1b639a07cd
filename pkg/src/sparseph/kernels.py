"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set SPARSE_PH_PURE_PYTHON=1 to force the numpy lane (used by the benchmark
and for debugging).  The compiled lane handles ambient dimension <= 8 and
<= 12 points per configuration; calls outside those limits fall through to
the numpy lane transparently.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_CAP_D = 8
_CAP_M = 12

if os.environ.get("SPARSE_PH_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

IMPLEMENTATION = "compiled" if _compiled is not None else "python"


def _pick(m: int, d: int):
    if _compiled is not None and m <= _CAP_M and d <= _CAP_D:
        return _compiled
    return _kernels_py


def meb(points) -> tuple[np.ndarray, float]:
    """Minimum enclosing ball of a point set (m, d) -> (center, radius)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("expected a non-empty (m, d) array of points")
    return _pick(*pts.shape).meb(pts)


def meb_radii(batch) -> np.ndarray:
    """Minimum enclosing ball radii for configs stacked as (B, m, d)."""
    bt = np.ascontiguousarray(batch, dtype=np.float64)
    if bt.ndim != 3:
        raise ValueError("expected a (B, m, d) array")
    if bt.shape[0] == 0:
        return np.empty(0)
    return _pick(bt.shape[1], bt.shape[2]).meb_radii(bt)


def birth_death(batch) -> np.ndarray:
    """Birth/death column pair for configs stacked as (B, m, d), m >= 3."""
    bt = np.ascontiguousarray(batch, dtype=np.float64)
    if bt.ndim != 3:
        raise ValueError("expected a (B, m, d) array")
    if bt.shape[1] < 3:
        raise ValueError("configurations need at least 3 points")
    if bt.shape[0] == 0:
        return np.empty((0, 2))
    return _pick(bt.shape[1], bt.shape[2]).birth_death(bt)


def connected_within(batch, r: float) -> np.ndarray:
    """Connectivity of the distance-r graph for configs (B, p, d)."""
    bt = np.ascontiguousarray(batch, dtype=np.float64)
    if bt.ndim != 3:
        raise ValueError("expected a (B, p, d) array")
    if bt.shape[0] == 0:
        return np.empty(0, dtype=bool)
    return np.asarray(_pick(bt.shape[1], bt.shape[2]).connected_within(bt, float(r)), dtype=bool)
