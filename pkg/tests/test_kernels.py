"""The compiled kernels and the numpy fallback must agree."""

import math

import numpy as np
import pytest

from sparseph import _kernels_py
from sparseph import kernels

compiled = pytest.importorskip("sparseph._kernels", reason="compiled lane not built")


def _configs(rng, count, m, d):
    return rng.normal(size=(count, m, d))


@pytest.mark.parametrize("m,d", [(3, 2), (4, 2), (3, 3), (5, 3), (6, 4)])
def test_meb_radii_lanes_agree(m, d):
    rng = np.random.default_rng(7 * m + d)
    configs = _configs(rng, 400, m, d)
    py = _kernels_py.meb_radii(configs)
    cy = compiled.meb_radii(configs)
    assert np.allclose(py, cy, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("m,d", [(3, 2), (4, 2), (4, 3), (5, 3)])
def test_birth_death_lanes_agree(m, d):
    rng = np.random.default_rng(11 * m + d)
    configs = _configs(rng, 400, m, d)
    py = _kernels_py.birth_death(configs)
    cy = compiled.birth_death(configs)
    assert np.allclose(py, cy, rtol=1e-12, atol=1e-14)
    assert np.all(py[:, 0] <= py[:, 1] * (1 + 1e-12))


def test_birth_death_triples_bitwise():
    # for 3 points the leave-one-out balls are exact pair midpoints, so
    # both lanes compute identical IEEE values
    rng = np.random.default_rng(3)
    configs = _configs(rng, 2000, 3, 2)
    py = _kernels_py.birth_death(configs)
    cy = compiled.birth_death(configs)
    assert np.array_equal(py, cy)


def test_birth_of_triple_is_max_edge_bitwise():
    rng = np.random.default_rng(5)
    configs = _configs(rng, 500, 3, 2)
    bd = kernels.birth_death(configs)
    for conf, (b, _) in zip(configs, bd):
        # same arithmetic as the kernels: sqrt of the coordinate-order sum
        # of squares (np.linalg.norm may round differently through BLAS)
        edges = [math.sqrt(float(((conf[i] - conf[j]) ** 2).sum()))
                 for i in range(3) for j in range(i + 1, 3)]
        assert b == max(edges)


def test_connected_within_lanes_agree():
    rng = np.random.default_rng(13)
    configs = rng.uniform(-1.5, 1.5, size=(3000, 4, 2))
    py = _kernels_py.connected_within(configs, 1.0)
    cy = compiled.connected_within(configs, 1.0)
    assert np.array_equal(py, cy)


def test_connected_within_known_cases():
    chain = np.array([[[0.0, 0.0], [0.9, 0.0], [1.8, 0.0], [2.7, 0.0]]])
    split = np.array([[[0.0, 0.0], [0.5, 0.0], [5.0, 0.0], [5.5, 0.0]]])
    assert kernels.connected_within(chain, 1.0)[0]
    assert not kernels.connected_within(split, 1.0)[0]


def test_meb_single_config_matches_batch():
    rng = np.random.default_rng(17)
    configs = _configs(rng, 50, 4, 3)
    radii = kernels.meb_radii(configs)
    for conf, r in zip(configs, radii):
        center, single = kernels.meb(conf)
        assert single == r
        assert np.all(np.linalg.norm(conf - center, axis=1) <= r * (1 + 1e-9) + 1e-12)


def test_degenerate_configs_do_not_crash():
    # coincident points and collinear points exercise the singular Gram paths
    same = np.zeros((1, 4, 2))
    assert kernels.meb_radii(same)[0] == 0.0
    line = np.array([[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]])
    assert kernels.meb_radii(line)[0] == pytest.approx(1.5, abs=1e-12)
    # dropping an interior point keeps both endpoints, so birth == death
    # and the configuration never carries a cycle
    bd = kernels.birth_death(line)
    assert bd[0, 0] == pytest.approx(3.0, abs=1e-12)
    assert bd[0, 1] == pytest.approx(3.0, abs=1e-12)
    assert bd[0, 0] >= bd[0, 1]
