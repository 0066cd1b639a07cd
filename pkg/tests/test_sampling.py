import math

import numpy as np
import pytest

from sparseph.sampling import (Density, PointCloud, SampleSpec,
                               TruncatedGaussian, UniformCube, load_points_csv,
                               poisson_variate, sample, save_cloud_csv)


def test_sample_is_seed_deterministic():
    cube = UniformCube(d=2, side=1.0)
    a = sample(cube, SampleSpec(n=100, seed=42))
    b = sample(cube, SampleSpec(n=100, seed=42))
    c = sample(cube, SampleSpec(n=100, seed=43))
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_binomial_count_is_exact():
    cloud = sample(UniformCube(d=3, side=2.0), SampleSpec(n=57, seed=0))
    assert cloud.n_points == 57
    assert cloud.points.shape == (57, 3)
    assert np.all(cloud.points >= 0.0) and np.all(cloud.points <= 2.0)


def test_poissonized_count_varies_with_mean_n():
    cube = UniformCube(d=2, side=1.0)
    counts = [sample(cube, SampleSpec(n=50, seed=s, poissonized=True)).n_points
              for s in range(200)]
    mean = np.mean(counts)
    # 3 sigma around Poisson(50)
    assert abs(mean - 50.0) <= 3.0 * math.sqrt(50.0 / 200.0)
    assert len(set(counts)) > 1


@pytest.mark.parametrize("mean", [0.0, 3.0, 12.0, 80.0, 1000.0])
def test_poisson_variate_moments(mean):
    rng = np.random.default_rng(7)
    draws = np.array([poisson_variate(rng, mean) for _ in range(4000)])
    assert draws.min() >= 0
    assert abs(draws.mean() - mean) <= 4.0 * math.sqrt(max(mean, 1e-12) / 4000.0) + 1e-12
    if mean > 0:
        assert abs(draws.var() / mean - 1.0) <= 0.2


def test_poisson_variate_pmf_small_mean():
    # chi-square GOF against Poisson(5) on bins 0..12
    rng = np.random.default_rng(99)
    draws = np.array([poisson_variate(rng, 5.0) for _ in range(20000)])
    top = 12
    observed = np.bincount(np.minimum(draws, top + 1), minlength=top + 2)
    log_pmf = [j * math.log(5.0) - 5.0 - math.lgamma(j + 1) for j in range(top + 1)]
    pmf = np.exp(log_pmf)
    expected = np.append(pmf, 1.0 - pmf.sum()) * 20000
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    # 13 cells, chi2(12) 99.9th percentile is 32.9
    assert chi2 < 32.9


def test_uniform_cube_pdf_and_power_integral():
    cube = UniformCube(d=2, side=2.0)
    assert cube.pdf(np.array([[1.0, 1.0]]))[0] == 0.25
    assert cube.pdf(np.array([[3.0, 0.5]]))[0] == 0.0
    # integral of f^p = side^(d (1-p))
    assert cube.power_integral(3) == pytest.approx(2.0 ** -4, rel=1e-15)
    assert UniformCube(d=2, side=1.0).power_integral(3) == 1.0


def test_truncated_gaussian_density_normalizes():
    density = TruncatedGaussian(d=2, sigma=1.0, radius=2.0)
    # MC integral of the pdf over the covering box
    rng = np.random.default_rng(1)
    box = rng.uniform(-2.0, 2.0, size=(400_000, 2))
    integral = density.pdf(box).mean() * 16.0
    assert integral == pytest.approx(1.0, abs=0.01)
    draws = density.draw(rng, 5000)
    assert np.all(np.linalg.norm(draws, axis=1) <= 2.0)


def test_density_round_trip():
    for density in (UniformCube(d=2, side=1.5),
                    TruncatedGaussian(d=3, sigma=0.7, radius=2.5)):
        assert Density.from_dict(density.to_dict()) == density


def test_cloud_csv_round_trip(tmp_path, rng):
    pts = rng.normal(size=(37, 3))
    path = tmp_path / "cloud.csv"
    save_cloud_csv(pts, path)
    back = load_points_csv(path, d=3)
    assert np.array_equal(back, pts)  # 17 significant digits round-trip exactly


def test_load_points_csv_names_bad_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0\n1,2\nx,3\n")
    with pytest.raises(ValueError, match="line 3"):
        load_points_csv(path)
    path.write_text("0,0\n1\n")
    with pytest.raises(ValueError, match="line 2"):
        load_points_csv(path)


def test_point_cloud_carries_spec():
    cube = UniformCube(d=2, side=1.0)
    spec = SampleSpec(n=10, seed=5)
    cloud = sample(cube, spec)
    assert isinstance(cloud, PointCloud)
    assert cloud.spec == spec
    assert cloud.density == cube
