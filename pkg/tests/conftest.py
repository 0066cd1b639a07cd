import itertools

import numpy as np
import pytest

from sparseph.geometry import min_enclosing_ball


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def sparse_cloud(rng, n, d=2, side=1.0):
    """Uniform cloud on a cube; the caller picks a threshold that keeps the
    neighbor graph sparse."""
    return rng.uniform(0.0, side, size=(n, d))


def brute_filtration(points, k, cutoff):
    """Reference Cech filtration: scan every subset up to dimension k+1.

    Returns {vertex tuple: value} with value = 2 * meb radius, clamped to
    be monotone under faces, subsets kept when value <= cutoff.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    values = {}
    for size in range(1, k + 3):
        for verts in itertools.combinations(range(n), size):
            if size == 1:
                values[verts] = 0.0
                continue
            _, radius = min_enclosing_ball(pts[list(verts)])
            value = 2.0 * radius
            faces = list(itertools.combinations(verts, size - 1))
            if any(face not in values for face in faces):
                continue  # some face exceeded the cutoff, so this must too
            value = max(value, *(values[face] for face in faces))
            if value <= cutoff:
                values[verts] = value
    return values
