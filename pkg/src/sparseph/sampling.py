"""Point cloud sampling: densities, binomial / Poissonized draws, CSV io.

Two densities are supported: the uniform density on an axis-aligned cube
and an isotropic Gaussian truncated to a centered ball.  Both expose their
pointwise values and sup, which the limit-constant estimators need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from . import streams
from .geometry import as_points

__all__ = [
    "Density",
    "UniformCube",
    "TruncatedGaussian",
    "SampleSpec",
    "PointCloud",
    "density_sup",
    "sample",
    "poisson_variate",
    "save_cloud_csv",
    "load_points_csv",
]


@dataclass(frozen=True)
class Density:
    """Base class: a probability density on R^d with known sup."""

    d: int

    def sup(self) -> float:
        raise NotImplementedError

    def pdf(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "Density":
        kind = data.get("kind")
        if kind == "uniform-cube":
            return UniformCube(d=int(data["d"]), side=float(data.get("side", 1.0)))
        if kind == "truncated-gaussian":
            return TruncatedGaussian(
                d=int(data["d"]),
                sigma=float(data.get("sigma", 1.0)),
                radius=float(data.get("radius", 3.0)),
            )
        raise ValueError(f"unknown density kind {kind!r}")


@dataclass(frozen=True)
class UniformCube(Density):
    """Uniform density on [0, side]^d."""

    side: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"side must be positive and finite, got {self.side}")

    def sup(self) -> float:
        return self.side ** (-self.d)

    def pdf(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.d)
        inside = ((pts >= 0.0) & (pts <= self.side)).all(axis=1)
        return np.where(inside, self.side ** (-self.d), 0.0)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.random((count, self.d)) * self.side

    def power_integral(self, p: int) -> float:
        """Exact integral of f^p over R^d."""
        return self.side ** (self.d * (1 - p))

    def to_dict(self) -> dict:
        return {"kind": "uniform-cube", "d": self.d, "side": self.side}


_NORMALIZATION_CHECKED: set[tuple] = set()


@dataclass(frozen=True)
class TruncatedGaussian(Density):
    """Isotropic N(0, sigma^2 I_d) conditioned on the ball of given radius."""

    sigma: float = 1.0
    radius: float = 3.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"truncation radius must be positive and finite, got {self.radius}")

    def _mass(self) -> float:
        # P(|N(0, sigma^2 I)| <= radius), regularized lower incomplete gamma
        return float(gammainc(self.d / 2.0, self.radius**2 / (2.0 * self.sigma**2)))

    def sup(self) -> float:
        return (2.0 * math.pi * self.sigma**2) ** (-self.d / 2.0) / self._mass()

    def pdf(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.d)
        r2 = np.einsum("md,md->m", pts, pts)
        peak = (2.0 * math.pi * self.sigma**2) ** (-self.d / 2.0) / self._mass()
        vals = peak * np.exp(-r2 / (2.0 * self.sigma**2))
        return np.where(r2 <= self.radius**2, vals, 0.0)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty((count, self.d))
        got = 0
        while got < count:
            block = max(count - got + 16, int(1.25 * (count - got)))
            cand = rng.standard_normal((block, self.d)) * self.sigma
            keep = cand[np.einsum("md,md->m", cand, cand) <= self.radius**2]
            take = min(keep.shape[0], count - got)
            out[got:got + take] = keep[:take]
            got += take
        return out

    def radial_cdf(self, rho) -> np.ndarray:
        """P(|X| <= rho), the analytic radial distribution (for GOF tests)."""
        rho = np.asarray(rho, dtype=np.float64)
        raw = gammainc(self.d / 2.0, np.clip(rho, 0, None) ** 2 / (2.0 * self.sigma**2))
        return np.clip(raw / self._mass(), 0.0, 1.0)

    def check_normalization(self, seed: int = 710, n_samples: int = 400_000) -> float:
        """MC estimate of the total mass; must come back within 1e-3 of 1."""
        rng = streams.generator(seed, 97)
        cand = rng.standard_normal((n_samples, self.d)) * self.sigma
        inside = np.einsum("md,md->m", cand, cand) <= self.radius**2
        est = float(inside.mean()) / self._mass()
        if abs(est - 1.0) > 1e-3:
            raise ValueError(
                f"density normalization check failed: MC mass {est:.6f} not within 1e-3 of 1")
        return est

    def to_dict(self) -> dict:
        return {"kind": "truncated-gaussian", "d": self.d,
                "sigma": self.sigma, "radius": self.radius}


def density_sup(density: Density) -> float:
    """Supremum of the density over its support."""
    return density.sup()


@dataclass(frozen=True)
class SampleSpec:
    """How to draw one cloud: intensity n, seed, binomial or Poissonized.

    Binomial mode draws exactly n points; Poissonized mode draws
    N ~ Poisson(n) first, then N points.
    """

    n: int
    seed: int
    poissonized: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be non-negative, got {self.n}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    density: Density
    spec: SampleSpec

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.density.d


def poisson_variate(rng: np.random.Generator, mean: float) -> int:
    """One Poisson draw: sequential inversion below mean 10, transformed
    rejection (PTRS) above.  Algorithm is fixed so streams are stable.
    """
    if mean < 0 or not math.isfinite(mean):
        raise ValueError(f"mean must be finite and non-negative, got {mean}")
    if mean == 0:
        return 0
    if mean <= 10.0:
        u = rng.random()
        p = math.exp(-mean)
        cum = p
        k = 0
        while u > cum:
            k += 1
            p *= mean / k
            cum += p
        return k
    b = 0.931 + 2.53 * math.sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_mean = math.log(mean)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v * inv_alpha / (a / (us * us) + b)) <= \
                k * log_mean - mean - math.lgamma(k + 1.0):
            return int(k)


def sample(density: Density, spec: SampleSpec) -> PointCloud:
    """Draw a cloud.  Deterministic given (density, spec)."""
    key = ("norm",) + tuple(sorted(density.to_dict().items()))
    if isinstance(density, TruncatedGaussian) and key not in _NORMALIZATION_CHECKED:
        density.check_normalization()
        _NORMALIZATION_CHECKED.add(key)
    rng = streams.generator(spec.seed)
    count = poisson_variate(rng, float(spec.n)) if spec.poissonized else spec.n
    pts = density.draw(rng, count) if count else np.empty((0, density.d))
    return PointCloud(points=pts, density=density, spec=spec)


def save_cloud_csv(points, path, header: bool = False) -> None:
    """Write one row per point, d float columns, 17 significant digits."""
    pts = as_points(points)
    with open(path, "w", encoding="ascii") as fh:
        if header:
            fh.write(",".join(f"x{i}" for i in range(pts.shape[1])) + "\n")
        for row in pts:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_points_csv(path, d: int | None = None) -> np.ndarray:
    """Read a cloud written by save_cloud_csv (header auto-detected).

    Raises ValueError naming the 1-based line of the first malformed row.
    """
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if lineno == 1 and cells and all(c.strip() == f"x{i}" for i, c in enumerate(cells)):
                continue
            try:
                row = [float(c) for c in cells]
            except ValueError:
                raise ValueError(f"line {lineno}: could not parse {line!r} as floats")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"line {lineno}: expected {width} columns, found {len(row)}")
            rows.append(row)
    if not rows:
        return np.empty((0, d if d else 0))
    pts = np.asarray(rows, dtype=np.float64)
    if d is not None and pts.shape[1] != d:
        raise ValueError(f"expected {d} columns, file has {pts.shape[1]}")
    return pts
