"""Monte Carlo estimators for the limiting diagram intensity.

In the sparse regime the expected number of degree-k diagram points in a
birth/death window, divided by n, converges to

    constant * mass(window),

where the constant is E_f[f^{k+1}] / (k+2)! for the sampling density f and
mass(window) integrates, over configurations (0, y_1, ..., y_{k+1}) with
y uniform in a covering box, the indicator that the configuration's cycle
has birth and death inside the window.  Both factors are estimated (or
computed exactly) here.

Estimates are deterministic functions of (seed, n_samples): work is split
into fixed-size shards with one counter-based stream per shard, so thread
count never changes the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .parallel import map_indexed
from .persistence import Rectangle
from .sampling import Density
from .streams import generator

__all__ = [
    "McEstimate",
    "MASS_METHODS",
    "estimate_window_mass",
    "estimate_limit_measure",
    "estimate_betti_limit",
    "estimate_connected_volume",
    "intensity_constant",
]

# Fixed shard size decouples results from the thread count.
_SHARD = 1 << 15

MASS_METHODS = ("interval", "indicator-product")


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo mean with its standard error.

    Exact values are represented with std_error 0, n_samples 0 and no
    seed; estimated values carry the seed of their stream.
    """

    value: float
    std_error: float
    n_samples: int
    seed: int | None = None

    @classmethod
    def exact(cls, value: float) -> "McEstimate":
        return cls(value=float(value), std_error=0.0, n_samples=0)

    def scaled(self, factor: float) -> "McEstimate":
        return McEstimate(self.value * factor, self.std_error * abs(factor),
                          self.n_samples, self.seed)

    def times(self, other: "McEstimate") -> "McEstimate":
        """Product of independent estimates, exact first-order variance.

        Var(XY) = EX^2 Var Y + EY^2 Var X + Var X Var Y for independent
        X, Y; n_samples reports the larger of the two streams and the
        seed follows the left factor unless it is exact.
        """
        var = (self.value ** 2 * other.std_error ** 2
               + other.value ** 2 * self.std_error ** 2
               + self.std_error ** 2 * other.std_error ** 2)
        return McEstimate(self.value * other.value, math.sqrt(var),
                          max(self.n_samples, other.n_samples),
                          self.seed if self.seed is not None else other.seed)

    def agrees(self, other: "McEstimate", n_sigma: float = 3.0) -> bool:
        gap = math.sqrt(self.std_error ** 2 + other.std_error ** 2)
        return abs(self.value - other.value) <= n_sigma * gap


def _mc_mean(eval_shard, n_samples: int, seed: int, path: tuple,
             threads: int | None) -> tuple[float, float]:
    """Sharded MC mean of a [0,1]-bounded statistic; returns (mean, se)."""
    n_shards = -(-n_samples // _SHARD)

    def work(i: int) -> tuple[float, float, int]:
        count = _SHARD if i < n_shards - 1 else n_samples - _SHARD * (i)
        rng = generator(seed, *path, i)
        return eval_shard(rng, count)

    parts = map_indexed(work, n_shards, threads)
    total = 0.0
    total_sq = 0.0
    n = 0
    for s, s2, c in parts:
        total += s
        total_sq += s2
        n += c
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


# Stream path tags.  Each estimator family draws from its own stream, and
# the two mass methods use distinct streams so their agreement is a real
# cross-check rather than a replay.
_TAG_MASS = 101
_TAG_CONNECTED = 102
_TAG_CONSTANT = 103
_METHOD_TAG = {"interval": 0, "indicator-product": 1}


def _window_indicator(bd: np.ndarray, rect: Rectangle, method: str) -> np.ndarray:
    births = bd[:, 0]
    deaths = bd[:, 1]
    if method == "interval":
        if rect.left_closed:
            in_birth = births <= rect.birth_hi
        else:
            in_birth = (rect.birth_lo < births) & (births <= rect.birth_hi)
        in_death = (rect.death_lo < deaths) & (deaths <= rect.death_hi)
        return (in_birth & in_death).astype(np.float64)
    if method == "indicator-product":
        # Product of threshold crossings at the four window corners; the
        # crossing indicator at an infinite corner is 0 by convention.
        born_hi = (births <= rect.birth_hi).astype(np.float64)
        if rect.left_closed:
            born_lo = np.zeros_like(born_hi)
        else:
            born_lo = (births <= rect.birth_lo).astype(np.float64)
        dead_lo = (deaths <= rect.death_lo).astype(np.float64)
        if math.isinf(rect.death_hi):
            dead_hi = np.zeros_like(dead_lo)
            surviving = 1.0 - dead_lo
        else:
            dead_hi = (deaths <= rect.death_hi).astype(np.float64)
            surviving = dead_hi - dead_lo
        return (born_hi - born_lo) * surviving
    raise ValueError(f"unknown method {method!r}; expected one of {MASS_METHODS}")


def estimate_window_mass(rect: Rectangle, k: int, d: int, mc_samples: int,
                         seed: int, method: str = "interval",
                         threads: int | None = None) -> McEstimate:
    """Volume of configurations whose cycle lands in the window.

    Integrates over y in [-birth_hi, birth_hi]^{d(k+1)} the indicator that
    the configuration (0, y_1, ..., y_{k+1}) has birth and death in the
    window; the box covers the support because birth bounds every distance
    to the origin.  Plain MC; both methods estimate the same integral from
    different streams.
    """
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    if mc_samples < 10_000:
        raise ValueError(f"mc_samples must be >= 10000, got {mc_samples}")
    if method not in MASS_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {MASS_METHODS}")
    half = rect.birth_hi
    volume = (2.0 * half) ** (d * (k + 1))
    path = (_TAG_MASS, k, d, _METHOD_TAG[method])

    def shard(rng, count):
        y = rng.uniform(-half, half, size=(count, k + 1, d))
        configs = np.concatenate([np.zeros((count, 1, d)), y], axis=1)
        hits = _window_indicator(kernels.birth_death(configs), rect, method)
        s = float(hits.sum())
        return s, float((hits * hits).sum()), count

    mean, se = _mc_mean(shard, mc_samples, seed, path, threads)
    return McEstimate(value=volume * mean, std_error=volume * se,
                      n_samples=mc_samples, seed=seed)


def intensity_constant(density: Density, k: int, mc_samples: int = 200_000,
                       seed: int = 0, threads: int | None = None) -> McEstimate:
    """E_f[f^{k+1}] / (k+2)! for the sampling density.

    Densities that expose power_integral(p) = integral of f^p are handled
    exactly; anything else is estimated by sampling.
    """
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    factorial = math.factorial(k + 2)
    power_integral = getattr(density, "power_integral", None)
    if power_integral is not None:
        return McEstimate.exact(power_integral(k + 2) / factorial)
    if mc_samples < 2:
        raise ValueError(f"mc_samples must be >= 2, got {mc_samples}")
    sup = density.sup() ** (k + 1)

    def shard(rng, count):
        x = density.draw(rng, count)
        values = density.pdf(x) ** (k + 1) / sup
        return float(values.sum()), float((values * values).sum()), count

    mean, se = _mc_mean(shard, mc_samples, seed, (_TAG_CONSTANT, k), threads)
    return McEstimate(value=sup * mean / factorial,
                      std_error=sup * se / factorial, n_samples=mc_samples,
                      seed=seed)


def estimate_limit_measure(rect: Rectangle, k: int, density: Density,
                           mc_samples: int, seed: int,
                           method: str = "interval",
                           threads: int | None = None) -> McEstimate:
    """Limit of E[window count] over the normalizer: the intensity
    constant times the window mass."""
    mass = estimate_window_mass(rect, k, density.d, mc_samples, seed,
                                method=method, threads=threads)
    constant = intensity_constant(density, k, mc_samples=max(mc_samples, 2),
                                  seed=seed, threads=threads)
    return mass.times(constant)


def estimate_betti_limit(density: Density, k: int, s: float, t: float,
                         mc_samples: int, seed: int,
                         method: str = "interval",
                         threads: int | None = None) -> McEstimate:
    """Limit of E[persistent Betti number beta(s, t)] / n.

    Cycles born by s and surviving past t form the window
    [0, s] x (t, inf]; both thresholds must be finite.
    """
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    if math.isinf(s) or math.isinf(t):
        raise ValueError("the persistent Betti limit needs finite thresholds")
    rect = Rectangle(birth_lo=0.0, birth_hi=s, death_lo=t,
                     death_hi=math.inf, left_closed=True)
    return estimate_limit_measure(rect, k, density, mc_samples, seed,
                                  method=method, threads=threads)


def estimate_connected_volume(k: int, d: int, r: float, mc_samples: int,
                              seed: int, threads: int | None = None) -> McEstimate:
    """Volume of y in R^{d(k+2)} with (0, y_1, ..., y_{k+2}) connected at r.

    Covering box [-(k+2) r, (k+2) r]^{d(k+2)}: a connected graph on k+3
    vertices reaches every vertex from the origin within k+2 hops.
    """
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    if not r > 0 or math.isinf(r):
        raise ValueError(f"threshold must be positive and finite, got {r}")
    if mc_samples < 2:
        raise ValueError(f"mc_samples must be >= 2, got {mc_samples}")
    half = (k + 2) * r
    volume = (2.0 * half) ** (d * (k + 2))

    def shard(rng, count):
        y = rng.uniform(-half, half, size=(count, k + 2, d))
        configs = np.concatenate([np.zeros((count, 1, d)), y], axis=1)
        hits = kernels.connected_within(configs, r).astype(np.float64)
        return float(hits.sum()), float((hits * hits).sum()), count

    mean, se = _mc_mean(shard, mc_samples, seed, (_TAG_CONNECTED, k, d), threads)
    return McEstimate(value=volume * mean, std_error=volume * se,
                      n_samples=mc_samples, seed=seed)
