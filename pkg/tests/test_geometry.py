import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseph.geometry import (as_points, min_enclosing_ball, neighbor_graph,
                               pairs_within, simplex_value)

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])


def test_meb_single_point():
    center, radius = min_enclosing_ball([[2.0, -1.0]])
    assert radius == 0.0
    assert np.array_equal(center, [2.0, -1.0])


def test_meb_pair_is_midpoint():
    center, radius = min_enclosing_ball([[0.0, 0.0], [2.0, 0.0]])
    assert np.array_equal(center, [1.0, 0.0])
    assert radius == 1.0


def test_meb_equilateral_triangle():
    # circumradius 1/sqrt(3)
    center, radius = min_enclosing_ball(EQUILATERAL)
    assert radius == pytest.approx(0.5773502691896257, abs=1e-15)
    assert np.allclose(center, [0.5, 0.28867513459481287], atol=1e-15)


def test_meb_obtuse_triangle_is_diameter():
    # the longest edge's endpoints carry the ball; the apex sits inside
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [1.0, 1.0]])
    center, radius = min_enclosing_ball(pts)
    assert np.allclose(center, [2.0, 0.0], atol=1e-12)
    assert radius == pytest.approx(2.0, abs=1e-12)


def test_meb_regular_tetrahedron():
    pts = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                    [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    _, radius = min_enclosing_ball(pts)
    assert radius == pytest.approx(math.sqrt(3.0), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 7), st.integers(2, 4))
def test_meb_contains_all_points(seed, m, d):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(m, d))
    center, radius = min_enclosing_ball(pts)
    dists = np.linalg.norm(pts - center, axis=1)
    assert np.all(dists <= radius * (1.0 + 1e-9) + 1e-12)
    # minimality: some point sits on the boundary
    assert dists.max() >= radius * (1.0 - 1e-9) - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_meb_shrinks_under_subsets(seed, m):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(m, 2))
    _, full = min_enclosing_ball(pts)
    for i in range(m):
        _, part = min_enclosing_ball(np.delete(pts, i, axis=0))
        assert part <= full * (1.0 + 1e-12)


def test_simplex_value_vertex_edge():
    assert simplex_value([[3.0, 4.0]]) == 0.0
    assert simplex_value([[0.0, 0.0], [3.0, 4.0]]) == 5.0


def test_simplex_value_equilateral():
    # 2 / sqrt(3), slightly above the edge length
    value = simplex_value(EQUILATERAL)
    assert value == pytest.approx(1.1547005383792515, abs=1e-15)
    assert value > 1.0


def test_pairs_within_brute_force_agreement(rng):
    pts = rng.uniform(0.0, 1.0, size=(300, 2))
    edges, dists = pairs_within(pts, 0.12)
    diff = pts[:, None, :] - pts[None, :, :]
    full = np.sqrt((diff * diff).sum(-1))
    expected = [(i, j) for i in range(300) for j in range(i + 1, 300)
                if full[i, j] <= 0.12]
    assert [tuple(e) for e in edges] == expected
    assert np.array_equal(dists, full[edges[:, 0], edges[:, 1]])


def test_pairs_within_small_input_matches_tree_path(rng):
    # below the brute-force crossover the same comparisons must decide
    pts = rng.uniform(0.0, 1.0, size=(40, 3))
    edges_small, _ = pairs_within(pts, 0.4)
    tiled = np.vstack([pts, pts + 100.0])  # push over the crossover
    edges_big, _ = pairs_within(tiled, 0.4)
    first_block = edges_big[(edges_big[:, 0] < 40) & (edges_big[:, 1] < 40)]
    assert np.array_equal(edges_small, first_block)


def test_neighbor_graph_symmetry(rng):
    pts = rng.uniform(0.0, 1.0, size=(80, 2))
    adj = neighbor_graph(pts, 0.2)
    for i, nbrs in enumerate(adj):
        assert i not in nbrs
        for j in nbrs:
            assert i in adj[j]


def test_as_points_validates():
    with pytest.raises(ValueError):
        as_points(np.zeros((2, 2, 2)))
    assert as_points([], d=3).shape == (0, 3)
