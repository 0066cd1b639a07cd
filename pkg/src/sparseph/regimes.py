"""Radius scalings and the simulation harnesses built on them.

With n points and connectivity radius r_n = a n^{-gamma} (log n)^{beta},
the normalizer n^{k+2} r_n^{d(k+1)} controls the rescaled degree-k diagram
counts.  Its growth splits the sparse regime (n r_n^d -> 0) three ways:
divergence (counts over any window grow like the normalizer and the
rescaled measure converges), a Poisson regime on the exponent boundary,
and a vanishing regime where windows are eventually empty and the decay
rate of P(count >= 1) matches the normalizer.

Each harness simulates clouds, computes truncated scaled diagrams, and
compares window statistics against the Monte Carlo oracles from the
limits module.  Every simulated diagram is cross-checked in-line: the
rectangle-count identity against persistent Betti numbers and the
isolated/connected-count sandwich are asserted exactly, trial by trial.
Results are deterministic functions of (config, master_seed); worker
count never changes output.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .cech import build_filtration
from .cycles import cliques_of_size, count_alive_cycles, sandwich_check
from .geometry import pairs_within
from .limits import (McEstimate, estimate_betti_limit, estimate_limit_measure,
                     estimate_window_mass)
from .parallel import map_indexed
from .persistence import (Diagram, Rectangle, compute_diagram, count_rectangle,
                          persistent_betti)
from .sampling import Density, SampleSpec, sample
from .streams import derive_seed

__all__ = [
    "RadiusSpec",
    "RegimeReport",
    "ExperimentConfig",
    "ExperimentResult",
    "classify",
    "normalizer",
    "run_divergence",
    "run_poisson",
    "run_vanishing",
    "palm_mean_check",
    "run_experiment",
]

_EXPONENT_TOL = 1e-12

# Sub-stream tags under the master seed.
_TAG_TRIAL = 1
_TAG_ORACLE = 2

_TRIAL_BATCH = 50

MODES = ("divergence", "poisson", "vanishing", "palm")

DEFAULT_TOLERANCES = {
    "relative_error": 0.2,
    "dispersion_lo": 0.7,
    "dispersion_hi": 1.3,
    "tv_distance": 0.1,
    "second_order_ratio": 0.1,
    "palm_relative": 0.1,
    "n_sigma": 3.0,
    "oracle_se_factor": 5.0,
}


@dataclass(frozen=True)
class RadiusSpec:
    """r_n = a * n^(-gamma) * (log n)^beta."""

    a: float
    gamma: float
    beta: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"a must be positive and finite, got {self.a}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")

    def radius(self, n: int) -> float:
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n}")
        return self.a * n ** (-self.gamma) * math.log(n) ** self.beta

    def sparse(self, d: int) -> bool:
        """Whether n r_n^d -> 0."""
        gd = self.gamma * d
        if abs(gd - 1.0) <= _EXPONENT_TOL:
            return self.beta < 0
        return gd > 1.0

    def to_dict(self) -> dict:
        return {"a": self.a, "gamma": self.gamma, "beta": self.beta}

    @staticmethod
    def from_dict(data: dict) -> "RadiusSpec":
        return RadiusSpec(a=float(data["a"]), gamma=float(data["gamma"]),
                          beta=float(data.get("beta", 0.0)))


@dataclass(frozen=True)
class RegimeReport:
    """Classification of the normalizer n^{k+2} r_n^{d(k+1)}.

    growth_exponent is the power of n, log_exponent the power of log n.
    omega_log_eta is the largest eta with normalizer = Omega((log n)^eta):
    +inf for polynomial growth, the log exponent on the boundary, -inf for
    polynomial decay.
    """

    regime: str
    sparse: bool
    growth_exponent: float
    log_exponent: float
    omega_log_eta: float
    poisson_rate: float | None = None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "sparse": self.sparse,
            "growth_exponent": self.growth_exponent,
            "log_exponent": self.log_exponent,
            "omega_log_eta": self.omega_log_eta,
            "poisson_rate": self.poisson_rate,
        }


def normalizer(radius: RadiusSpec, k: int, d: int, n: int) -> float:
    """n^{k+2} r_n^{d(k+1)}."""
    return float(n) ** (k + 2) * radius.radius(n) ** (d * (k + 1))


def classify(radius: RadiusSpec, k: int, d: int) -> RegimeReport:
    """Split the sparse regime by the normalizer's growth exponents."""
    if k < 1:
        raise ValueError(f"degree k must be >= 1, got {k}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    if not radius.sparse(d):
        raise ValueError(
            f"not in sparse regime: gamma*d = {radius.gamma * d} with "
            f"beta = {radius.beta} gives n r_n^d -> infinity or a constant")
    exponent = (k + 2) - radius.gamma * d * (k + 1)
    log_exponent = radius.beta * d * (k + 1)
    if exponent > _EXPONENT_TOL:
        return RegimeReport("divergence", True, exponent, log_exponent, math.inf)
    if exponent < -_EXPONENT_TOL:
        return RegimeReport("vanishing", True, exponent, log_exponent, -math.inf)
    if log_exponent > _EXPONENT_TOL:
        return RegimeReport("divergence", True, exponent, log_exponent, log_exponent)
    if log_exponent < -_EXPONENT_TOL:
        return RegimeReport("vanishing", True, exponent, log_exponent, log_exponent)
    rate = float(radius.a) ** (d * (k + 1))
    return RegimeReport("poisson", True, exponent, log_exponent, 0.0,
                        poisson_rate=rate)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a harness run depends on, JSON round-trippable."""

    mode: str
    k: int
    d: int
    density: Density
    radius: RadiusSpec
    rectangles: tuple[Rectangle, ...] = ()
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    n_trials: int = 1
    master_seed: int = 0
    mc_samples: int = 1_000_000
    poissonized: bool = False
    betti_t: float | None = None
    palm_s: float | None = None
    palm_t: float | None = None
    allow_rerun: bool = True
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.k < 1:
            raise ValueError(f"degree k must be >= 1, got {self.k}")
        if self.d != self.density.d:
            raise ValueError(f"d={self.d} does not match density dimension {self.density.d}")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.mc_samples < 10_000:
            raise ValueError(f"mc_samples must be >= 10000, got {self.mc_samples}")
        if self.n is not None and self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.n_grid is not None:
            object.__setattr__(self, "n_grid", tuple(int(m) for m in self.n_grid))
            if len(self.n_grid) < 1 or any(m < 2 for m in self.n_grid):
                raise ValueError(f"n_grid entries must be >= 2, got {self.n_grid}")
            if list(self.n_grid) != sorted(set(self.n_grid)):
                raise ValueError(f"n_grid must be strictly increasing, got {self.n_grid}")
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        merged = dict(DEFAULT_TOLERANCES)
        unknown = set(self.tolerances) - set(merged)
        if unknown:
            raise ValueError(f"unknown tolerance keys {sorted(unknown)}")
        merged.update(self.tolerances)
        object.__setattr__(self, "tolerances", merged)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "k": self.k,
            "d": self.d,
            "density": self.density.to_dict(),
            "radius": self.radius.to_dict(),
            "rectangles": [r.to_dict() for r in self.rectangles],
            "n": self.n,
            "n_grid": list(self.n_grid) if self.n_grid is not None else None,
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "mc_samples": self.mc_samples,
            "poissonized": self.poissonized,
            "betti_t": self.betti_t,
            "palm_s": self.palm_s,
            "palm_t": self.palm_t,
            "allow_rerun": self.allow_rerun,
            "tolerances": dict(self.tolerances),
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        known = {"mode", "k", "d", "density", "radius", "rectangles", "n",
                 "n_grid", "n_trials", "master_seed", "mc_samples",
                 "poissonized", "betti_t", "palm_s", "palm_t", "allow_rerun",
                 "tolerances"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return ExperimentConfig(
            mode=data["mode"],
            k=int(data["k"]),
            d=int(data["d"]),
            density=Density.from_dict(data["density"]),
            radius=RadiusSpec.from_dict(data["radius"]),
            rectangles=tuple(Rectangle.from_dict(r)
                             for r in data.get("rectangles", [])),
            n=int(data["n"]) if data.get("n") is not None else None,
            n_grid=tuple(data["n_grid"]) if data.get("n_grid") is not None else None,
            n_trials=int(data.get("n_trials", 1)),
            master_seed=int(data.get("master_seed", 0)),
            mc_samples=int(data.get("mc_samples", 1_000_000)),
            poissonized=bool(data.get("poissonized", False)),
            betti_t=float(data["betti_t"]) if data.get("betti_t") is not None else None,
            palm_s=float(data["palm_s"]) if data.get("palm_s") is not None else None,
            palm_t=float(data["palm_t"]) if data.get("palm_t") is not None else None,
            allow_rerun=bool(data.get("allow_rerun", True)),
            tolerances=dict(data.get("tolerances", {})),
        )


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple[dict, ...]
    summary: dict

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.summary["verdicts"])


def _scaled_cutoff(config: ExperimentConfig) -> float:
    """Largest finite window coordinate; the filtration is truncated there."""
    coords = [0.0]
    for rect in config.rectangles:
        coords.append(rect.max_finite_coordinate())
    for value in (config.betti_t, config.palm_s, config.palm_t):
        if value is not None:
            coords.append(value)
    top = max(coords)
    if top <= 0:
        raise ValueError("no positive finite window coordinate to truncate at")
    return top


def _check_rectangles(diag: Diagram, rects, points, k: int) -> None:
    """Per-trial exact cross-checks, raised as hard errors on violation.

    The window count must satisfy the alternating persistent-Betti
    identity at the window corners (an infinite corner contributes 0),
    and the isolated/connected counts must bracket beta at the corner
    (birth_hi, death_lo).  Integer equality, no tolerances.
    """
    for rect in rects:
        count = count_rectangle(diag, rect)
        s, t = rect.birth_lo, rect.birth_hi
        u, v = rect.death_lo, rect.death_hi
        b_tu = persistent_betti(diag, t, u)
        b_tv = persistent_betti(diag, t, v)
        b_su = persistent_betti(diag, s, u)
        b_sv = persistent_betti(diag, s, v)
        if count != b_tu - b_tv - b_su + b_sv:
            raise RuntimeError(
                f"rectangle-count identity violated: count={count}, "
                f"betti terms=({b_tu},{b_tv},{b_su},{b_sv}) for {rect}")
        report = sandwich_check(points, k, t, u, diag)
        if not report.ok:
            raise RuntimeError(
                f"sandwich bounds violated at ({t}, {u}): {report}")


def _has_candidate_clique(points: np.ndarray, k: int, cutoff: float) -> bool:
    """Any (k+2)-clique in the neighbor graph at the physical cutoff?

    The graph is inflated by a hair so the answer errs toward False
    negatives never occurring: a miss here would wrongly zero a trial.
    """
    edges, _ = pairs_within(points, cutoff * (1.0 + 1e-9))
    if edges.shape[0] < math.comb(k + 2, 2):
        return False
    adj: list[set[int]] = [set() for _ in range(points.shape[0])]
    for i, j in edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))
    return next(cliques_of_size(adj, k + 2), None) is not None


def _run_trial(config: ExperimentConfig, n: int, seed: int,
               poissonized: bool, short_circuit: bool) -> dict:
    """Sample one cloud, compute its truncated scaled diagram, count.

    short_circuit skips diagram construction when no (k+2)-clique exists
    at the cutoff; valid for window counts with finite death_hi (a death
    inside the window forces a clique) and used only by the vanishing
    harness, whose in-line checks are skipped on such trials.
    """
    r_n = config.radius.radius(n)
    top = _scaled_cutoff(config)
    cloud = sample(config.density,
                   SampleSpec(n=n, seed=seed, poissonized=poissonized))
    points = cloud.points
    out: dict = {"n_points": cloud.n_points, "short_circuited": False}
    if short_circuit and not _has_candidate_clique(points, config.k, r_n * top):
        out["short_circuited"] = True
        out["counts"] = [0] * len(config.rectangles)
        return out
    fc = build_filtration(points, config.k, cutoff=r_n * top)
    diag = compute_diagram(fc, config.k, scale=r_n)
    # The scaled truncation threshold is exactly `top` by construction;
    # recomputing it as (r_n * top) / r_n may drift an ulp and spuriously
    # reject window corners sitting exactly on the boundary.
    diag = dataclasses.replace(diag, cutoff=top)
    check_rects = list(config.rectangles)
    if config.palm_s is not None:
        # Palm trials always cross-check at the implicit window, so every
        # simulated cloud is covered even without configured rectangles.
        check_rects.append(Rectangle(birth_lo=0.0, birth_hi=config.palm_s,
                                     death_lo=config.palm_t, death_hi=math.inf,
                                     left_closed=True))
    _check_rectangles(diag, check_rects, points, config.k)
    out["counts"] = [count_rectangle(diag, rect) for rect in config.rectangles]
    if config.betti_t is not None:
        out["betti"] = persistent_betti(diag, config.betti_t, config.betti_t)
    if config.palm_s is not None:
        out["window_cycles"] = count_alive_cycles(
            points, config.k, config.palm_s, config.palm_t, scale=r_n)
        out["palm_betti"] = persistent_betti(diag, config.palm_s, config.palm_t)
    return out


def _trial_records(n: int, outcomes: list[dict], n_rects: int) -> list[dict]:
    """JSONL-able records, one per (n, rectangle, trial batch)."""
    records = []
    for start in range(0, len(outcomes), _TRIAL_BATCH):
        batch = outcomes[start:start + _TRIAL_BATCH]
        index = start // _TRIAL_BATCH
        records.append({
            "kind": "trials", "n": n, "batch": index, "trial_start": start,
            "n_points": [o["n_points"] for o in batch],
            "short_circuited": sum(o["short_circuited"] for o in batch),
        })
        for rect_index in range(n_rects):
            records.append({
                "kind": "counts", "n": n, "rect_index": rect_index,
                "batch": index, "trial_start": start,
                "counts": [o["counts"][rect_index] for o in batch],
            })
        for key in ("betti", "window_cycles", "palm_betti"):
            if batch and key in batch[0]:
                records.append({
                    "kind": key, "n": n, "batch": index, "trial_start": start,
                    "values": [o[key] for o in batch],
                })
    return records


def _window_oracles(config: ExperimentConfig, threads) -> list[dict]:
    """Limit-measure oracle per rectangle, with the resolution precheck
    and a boundary-mass diagnostic from 1%-inflated/deflated windows."""
    tol = config.tolerances
    oracles = []
    for index, rect in enumerate(config.rectangles):
        seed = derive_seed(config.master_seed, _TAG_ORACLE, index)
        mu = estimate_limit_measure(rect, config.k, config.density,
                                    config.mc_samples, seed, threads=threads)
        if mu.value < tol["oracle_se_factor"] * mu.std_error:
            raise ValueError(
                f"rectangle {index} oracle mass is unresolved "
                f"({mu.value:.3g} < {tol['oracle_se_factor']} x SE "
                f"{mu.std_error:.3g}); enlarge the window or mc_samples")
        boundary = _boundary_mass(rect, config, seed, threads)
        oracles.append({
            "rect_index": index,
            "value": mu.value,
            "std_error": mu.std_error,
            "n_samples": mu.n_samples,
            "boundary_mass_rel": boundary,
        })
    return oracles


def _stretched(rect: Rectangle, factor: float) -> Rectangle:
    """Window with every finite boundary moved outward (factor > 1) or
    inward (factor < 1) by the given relative amount."""
    inv = 1.0 / factor
    death_hi = rect.death_hi if math.isinf(rect.death_hi) else rect.death_hi * factor
    birth_lo = 0.0 if rect.left_closed else rect.birth_lo * inv
    death_lo = rect.death_lo * inv
    death_lo = min(death_lo, death_hi)
    birth_hi = min(rect.birth_hi * factor, death_lo)
    birth_lo = min(birth_lo, birth_hi)
    return Rectangle(birth_lo=birth_lo, birth_hi=birth_hi, death_lo=death_lo,
                     death_hi=death_hi, left_closed=rect.left_closed)


def _boundary_mass(rect: Rectangle, config: ExperimentConfig, seed: int,
                   threads) -> float:
    """Relative mass within 1% of the window boundary.

    Small values justify treating the window as a continuity set of the
    limit measure; reported as a diagnostic, not gated.
    """
    shrunk = _stretched(rect, 1.0 / 1.01)
    grown = _stretched(rect, 1.01)
    inner = estimate_window_mass(shrunk, config.k, config.d,
                                 config.mc_samples, seed, threads=threads)
    outer = estimate_window_mass(grown, config.k, config.d,
                                 config.mc_samples, seed, threads=threads)
    if outer.value <= 0:
        return 0.0
    return max(outer.value - inner.value, 0.0) / outer.value


def _verdict(name: str, passed: bool, observed: float, expected: float,
             tolerance: float, statistical: bool, rect_index=None,
             detail: str = "") -> dict:
    return {
        "name": name, "rect_index": rect_index, "pass": bool(passed),
        "observed": observed, "expected": expected, "tolerance": tolerance,
        "statistical": statistical, "detail": detail,
    }


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, math.inf
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def _run_trials(config: ExperimentConfig, n: int, n_trials: int, attempt: int,
                threads, poissonized: bool, short_circuit: bool = False,
                stream: int = 0) -> list[dict]:
    def work(i: int) -> dict:
        seed = derive_seed(config.master_seed, _TAG_TRIAL, attempt, n, i, stream)
        return _run_trial(config, n, seed, poissonized, short_circuit)

    return map_indexed(work, n_trials, threads)


def run_divergence(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Rescaled window counts along an n-grid against the limit measure.

    Verdicts: the final grid point's seed-averaged count over the
    normalizer is within `relative_error` of the oracle, and the relative
    error is non-increasing across the grid.  The rescaled persistent
    Betti number at betti_t is recorded against its own limit as a
    diagnostic.
    """
    report = classify(config.radius, config.k, config.d)
    if report.regime != "divergence":
        raise ValueError(f"config radius classifies as {report.regime}, not divergence")
    if not config.n_grid or not config.rectangles:
        raise ValueError("divergence mode needs n_grid and at least one rectangle")
    tol = config.tolerances

    def attempt_run(attempt: int):
        records: list[dict] = []
        per_n = []
        for n in config.n_grid:
            outcomes = _run_trials(config, n, config.n_trials, attempt, threads,
                                   config.poissonized)
            records.extend(_trial_records(n, outcomes, len(config.rectangles)))
            rho = normalizer(config.radius, config.k, config.d, n)
            entry = {"n": n, "normalizer": rho, "rects": []}
            for i in range(len(config.rectangles)):
                counts = np.array([o["counts"][i] for o in outcomes], dtype=np.float64)
                mean, se = _mean_se(counts)
                entry["rects"].append({
                    "rect_index": i, "mean_count": mean, "mean_se": se,
                    "ratio": mean / rho, "ratio_se": se / rho,
                })
            if config.betti_t is not None:
                betti = np.array([o["betti"] for o in outcomes], dtype=np.float64)
                mean, se = _mean_se(betti)
                entry["betti_ratio"] = mean / rho
                entry["betti_ratio_se"] = se / rho
            per_n.append(entry)
        return records, per_n

    oracles = _window_oracles(config, threads)
    betti_oracle = None
    if config.betti_t is not None:
        betti_oracle = estimate_betti_limit(
            config.density, config.k, config.betti_t, config.betti_t,
            config.mc_samples, derive_seed(config.master_seed, _TAG_ORACLE, 100),
            threads=threads)

    def judge(per_n):
        verdicts = []
        for i in range(len(config.rectangles)):
            mu = oracles[i]["value"]
            errors = [abs(entry["rects"][i]["ratio"] - mu) / mu for entry in per_n]
            verdicts.append(_verdict(
                "final_relative_error", errors[-1] <= tol["relative_error"],
                errors[-1], 0.0, tol["relative_error"], True, rect_index=i,
                detail=f"n={config.n_grid[-1]}"))
            monotone = all(errors[j + 1] <= errors[j] for j in range(len(errors) - 1))
            verdicts.append(_verdict(
                "relative_error_non_increasing", monotone,
                max(errors[j + 1] - errors[j] for j in range(len(errors) - 1))
                if len(errors) > 1 else 0.0,
                0.0, 0.0, True, rect_index=i,
                detail=" ".join(f"{e:.4f}" for e in errors)))
        return verdicts

    records, per_n = attempt_run(0)
    verdicts = judge(per_n)
    rerun_used = False
    if config.allow_rerun and any(not v["pass"] and v["statistical"] for v in verdicts):
        rerun_used = True
        first_verdicts = verdicts
        records, per_n = attempt_run(1)
        verdicts = judge(per_n)

    summary = {
        "mode": "divergence", "regime": report.to_dict(),
        "oracles": oracles, "per_n": per_n, "verdicts": verdicts,
        "rerun_used": rerun_used,
    }
    if rerun_used:
        summary["first_attempt_verdicts"] = first_verdicts
    if betti_oracle is not None:
        last = per_n[-1]
        gap = abs(last["betti_ratio"] - betti_oracle.value) / betti_oracle.value
        summary["betti_limit"] = {
            "t": config.betti_t, "oracle": betti_oracle.value,
            "oracle_se": betti_oracle.std_error,
            "final_ratio": last["betti_ratio"],
            "final_ratio_se": last["betti_ratio_se"],
            "relative_gap": gap,
        }
    return ExperimentResult(config=config, records=tuple(records), summary=summary)


def _tv_to_poisson(counts: np.ndarray, mean: float) -> float:
    """Total variation between the empirical pmf and Poisson(mean).

    Poisson mass beyond the observed maximum enters in full, so the
    distance is exact for the truncated comparison.
    """
    top = int(counts.max(initial=0))
    pmf = np.bincount(counts.astype(np.int64), minlength=top + 1) / counts.size
    j = np.arange(top + 1)
    log_pois = j * math.log(mean) - mean - np.array([math.lgamma(x + 1) for x in j]) \
        if mean > 0 else np.where(j == 0, 0.0, -math.inf)
    pois = np.exp(log_pois)
    tail = max(1.0 - pois.sum(), 0.0)
    return 0.5 * (np.abs(pmf - pois).sum() + tail)


def _disjoint_windows(r1: Rectangle, r2: Rectangle) -> bool:
    """No (birth, death) point can fall in both windows."""

    def birth_interval(r):
        lo = -1.0 if r.left_closed else r.birth_lo
        return lo, r.birth_hi

    def separated(a, b):
        return a[1] <= b[0] or b[1] <= a[0]

    return separated(birth_interval(r1), birth_interval(r2)) or \
        separated((r1.death_lo, r1.death_hi), (r2.death_lo, r2.death_hi))


def run_poisson(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Fixed-n trials on the exponent boundary against the Poisson limit.

    Verdicts per rectangle: mean within n_sigma combined SE of the
    oracle, dispersion index within [dispersion_lo, dispersion_hi], and
    total-variation distance to Poisson(oracle) at most tv_distance.
    Counts over windows that cannot share a diagram point are checked
    for vanishing covariance.
    """
    report = classify(config.radius, config.k, config.d)
    if report.regime != "poisson":
        raise ValueError(f"config radius classifies as {report.regime}, not poisson")
    if abs(report.poisson_rate - 1.0) > 1e-9:
        raise ValueError("unsupported scaling c; use a=1-normalized spec")
    if config.n is None or not config.rectangles:
        raise ValueError("poisson mode needs n and at least one rectangle")
    tol = config.tolerances

    oracles = _window_oracles(config, threads)

    def attempt_run(attempt: int):
        outcomes = _run_trials(config, config.n, config.n_trials, attempt,
                               threads, config.poissonized)
        records = _trial_records(config.n, outcomes, len(config.rectangles))
        matrix = np.array([o["counts"] for o in outcomes], dtype=np.float64)
        return records, matrix

    def judge(matrix):
        verdicts = []
        trials = matrix.shape[0]
        if trials < 2:
            verdicts.append(_verdict(
                "sufficient_trials", False, float(trials), 2.0, 0.0, False,
                detail="pmf degenerate with fewer than 2 trials"))
            return verdicts, []
        stats = []
        for i in range(len(config.rectangles)):
            counts = matrix[:, i]
            mu = oracles[i]["value"]
            mean, se = _mean_se(counts)
            combined = math.hypot(se, oracles[i]["std_error"])
            verdicts.append(_verdict(
                "mean_matches_oracle",
                abs(mean - mu) <= tol["n_sigma"] * combined,
                mean, mu, tol["n_sigma"] * combined, True, rect_index=i))
            variance = float(counts.var(ddof=1))
            dispersion = variance / mean if mean > 0 else None
            verdicts.append(_verdict(
                "dispersion_index",
                dispersion is not None
                and tol["dispersion_lo"] <= dispersion <= tol["dispersion_hi"],
                dispersion, 1.0, tol["dispersion_hi"], True, rect_index=i))
            tv = _tv_to_poisson(counts, mu)
            verdicts.append(_verdict(
                "tv_distance", tv <= tol["tv_distance"], tv, 0.0,
                tol["tv_distance"], True, rect_index=i))
            stats.append({"rect_index": i, "mean": mean, "mean_se": se,
                          "variance": variance, "dispersion": dispersion,
                          "tv_distance": tv})
        for i in range(len(config.rectangles)):
            for j in range(i + 1, len(config.rectangles)):
                if not _disjoint_windows(config.rectangles[i], config.rectangles[j]):
                    continue
                cov = float(np.cov(matrix[:, i], matrix[:, j], ddof=1)[0, 1])
                v1 = float(matrix[:, i].var(ddof=1))
                v2 = float(matrix[:, j].var(ddof=1))
                se_cov = math.sqrt(max(v1 * v2 + cov * cov, 0.0) / trials)
                verdicts.append(_verdict(
                    "disjoint_covariance", abs(cov) <= tol["n_sigma"] * se_cov,
                    cov, 0.0, tol["n_sigma"] * se_cov, True, rect_index=i,
                    detail=f"rects ({i},{j})"))
        return verdicts, stats

    records, matrix = attempt_run(0)
    verdicts, stats = judge(matrix)
    rerun_used = False
    if config.allow_rerun and any(not v["pass"] and v["statistical"] for v in verdicts):
        rerun_used = True
        first_verdicts = verdicts
        records, matrix = attempt_run(1)
        verdicts, stats = judge(matrix)

    summary = {
        "mode": "poisson", "regime": report.to_dict(), "n": config.n,
        "n_trials": config.n_trials, "oracles": oracles, "stats": stats,
        "verdicts": verdicts, "rerun_used": rerun_used,
    }
    if rerun_used:
        summary["first_attempt_verdicts"] = first_verdicts
    return ExperimentResult(config=config, records=tuple(records), summary=summary)


def run_vanishing(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Decay of P(window count >= 1) against the normalizer and oracle.

    Trials without a (k+2)-clique at the cutoff short-circuit to zero
    counts, which is exact for windows with finite death_hi: a death
    inside the window exhibits a clique.  The in-line identity/sandwich
    checks run only on non-short-circuited trials.
    """
    report = classify(config.radius, config.k, config.d)
    if report.regime != "vanishing":
        raise ValueError(f"config radius classifies as {report.regime}, not vanishing")
    if config.n is None or not config.rectangles:
        raise ValueError("vanishing mode needs n and at least one rectangle")
    if config.betti_t is not None or config.palm_s is not None:
        raise ValueError("vanishing mode does not evaluate Betti or window-cycle means")
    finite = all(math.isfinite(r.death_hi) for r in config.rectangles)
    if not finite:
        raise ValueError("vanishing windows must have finite death_hi")
    rho = normalizer(config.radius, config.k, config.d, config.n)
    if rho < 1e-280:
        raise ValueError(f"normalizer {rho} underflows; reduce n")
    tol = config.tolerances

    oracles = _window_oracles(config, threads)

    def attempt_run(attempt: int):
        outcomes = _run_trials(config, config.n, config.n_trials, attempt,
                               threads, config.poissonized, short_circuit=True)
        records = _trial_records(config.n, outcomes, len(config.rectangles))
        matrix = np.array([o["counts"] for o in outcomes], dtype=np.int64)
        shorted = sum(o["short_circuited"] for o in outcomes)
        return records, matrix, shorted

    def judge(matrix):
        verdicts = []
        trials = matrix.shape[0]
        stats = []
        for i in range(len(config.rectangles)):
            counts = matrix[:, i]
            mu = oracles[i]["value"]
            at_least_1 = int((counts >= 1).sum())
            at_least_2 = int((counts >= 2).sum())
            p1 = at_least_1 / trials
            p1_se = math.sqrt(p1 * (1.0 - p1) / trials)
            ratio = p1 / rho
            combined = math.hypot(p1_se / rho, oracles[i]["std_error"])
            detail = ""
            if at_least_1 == 0:
                detail = ("no window events observed; increase n_trials or "
                          "shrink n so the normalizer grows")
            verdicts.append(_verdict(
                "rate_matches_oracle",
                at_least_1 > 0 and abs(ratio - mu) <= tol["n_sigma"] * combined,
                ratio, mu, tol["n_sigma"] * combined, True, rect_index=i,
                detail=detail))
            second = at_least_2 / at_least_1 if at_least_1 else None
            verdicts.append(_verdict(
                "second_order_ratio",
                at_least_1 > 0 and second <= tol["second_order_ratio"],
                second, 0.0, tol["second_order_ratio"], True, rect_index=i,
                detail=detail))
            stats.append({"rect_index": i, "at_least_1": at_least_1,
                          "at_least_2": at_least_2, "rate_ratio": ratio,
                          "rate_ratio_se": combined})
        return verdicts, stats

    records, matrix, shorted = attempt_run(0)
    verdicts, stats = judge(matrix)
    rerun_used = False
    if config.allow_rerun and any(not v["pass"] and v["statistical"] for v in verdicts):
        rerun_used = True
        first_verdicts = verdicts
        records, matrix, shorted = attempt_run(1)
        verdicts, stats = judge(matrix)

    summary = {
        "mode": "vanishing", "regime": report.to_dict(), "n": config.n,
        "n_trials": config.n_trials, "normalizer": rho, "oracles": oracles,
        "stats": stats, "short_circuited_trials": shorted,
        "verdicts": verdicts, "rerun_used": rerun_used,
    }
    if rerun_used:
        summary["first_attempt_verdicts"] = first_verdicts
    return ExperimentResult(config=config, records=tuple(records), summary=summary)


def palm_mean_check(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Window-cycle count means under Poissonized and binomial sampling.

    For a Poissonized cloud the mean number of (k+2)-subsets with birth
    <= s and death > t over the normalizer equals the limit A(s, t) up to
    O(r_n) smoothing bias; the binomial persistent Betti number at (s, t)
    obeys the same asymptotics.  Verdicts allow the wider of n_sigma
    combined SE and palm_relative (the latter only for n <= 10^4, where
    the smoothing bias is not yet negligible).  The Poissonized/binomial
    mean gap is also checked at n_sigma combined SE, and the Poissonized
    dispersion index is reported without a gate.
    """
    if not config.poissonized:
        raise ValueError("palm mode needs poissonized=true")
    if config.palm_s is None or config.palm_t is None:
        raise ValueError("palm mode needs palm_s and palm_t")
    if not 0 < config.palm_s <= config.palm_t:
        raise ValueError(f"need 0 < palm_s <= palm_t, got "
                         f"({config.palm_s}, {config.palm_t})")
    if config.n is None:
        raise ValueError("palm mode needs n")
    report = classify(config.radius, config.k, config.d)
    tol = config.tolerances
    rho = normalizer(config.radius, config.k, config.d, config.n)

    oracle = estimate_betti_limit(
        config.density, config.k, config.palm_s, config.palm_t,
        config.mc_samples, derive_seed(config.master_seed, _TAG_ORACLE, 200),
        threads=threads)

    def attempt_run(attempt: int):
        pois = _run_trials(config, config.n, config.n_trials, attempt, threads,
                           poissonized=True, stream=0)
        binom = _run_trials(config, config.n, config.n_trials, attempt, threads,
                            poissonized=False, stream=1)
        records = [dict(r, sampling="poissonized")
                   for r in _trial_records(config.n, pois, len(config.rectangles))]
        records += [dict(r, sampling="binomial")
                    for r in _trial_records(config.n, binom, len(config.rectangles))]
        return records, pois, binom

    def judge(pois, binom):
        g_pois = np.array([o["window_cycles"] for o in pois], dtype=np.float64)
        g_binom = np.array([o["window_cycles"] for o in binom], dtype=np.float64)
        betti = np.array([o["palm_betti"] for o in binom], dtype=np.float64)
        verdicts = []
        a_hat = oracle.value

        def band(se_ratio: float) -> float:
            wide = tol["palm_relative"] * a_hat if config.n <= 10_000 else 0.0
            return max(tol["n_sigma"] * se_ratio, wide)

        mean_p, se_p = _mean_se(g_pois)
        combined = math.hypot(se_p / rho, oracle.std_error)
        verdicts.append(_verdict(
            "poissonized_window_cycle_mean",
            abs(mean_p / rho - a_hat) <= band(combined),
            mean_p / rho, a_hat, band(combined), True))
        mean_b, se_b = _mean_se(betti)
        combined_b = math.hypot(se_b / rho, oracle.std_error)
        verdicts.append(_verdict(
            "binomial_betti_mean",
            abs(mean_b / rho - a_hat) <= band(combined_b),
            mean_b / rho, a_hat, band(combined_b), True))
        mean_g, se_g = _mean_se(g_binom)
        gap_se = math.hypot(se_p, se_g)
        verdicts.append(_verdict(
            "depoissonization_gap",
            abs(mean_p - mean_g) <= tol["n_sigma"] * gap_se,
            mean_p - mean_g, 0.0, tol["n_sigma"] * gap_se, True))
        if g_pois.size > 1 and mean_p > 0:
            dispersion = float(g_pois.var(ddof=1)) / mean_p
        else:
            dispersion = None
        stats = {
            "poissonized_mean": mean_p, "poissonized_se": se_p,
            "binomial_mean": mean_g, "binomial_se": se_g,
            "binomial_betti_mean": mean_b, "binomial_betti_se": se_b,
            "poissonized_dispersion": dispersion,
            "normalizer": rho,
        }
        return verdicts, stats

    records, pois, binom = attempt_run(0)
    verdicts, stats = judge(pois, binom)
    rerun_used = False
    if config.allow_rerun and any(not v["pass"] and v["statistical"] for v in verdicts):
        rerun_used = True
        first_verdicts = verdicts
        records, pois, binom = attempt_run(1)
        verdicts, stats = judge(pois, binom)

    summary = {
        "mode": "palm", "regime": report.to_dict(), "n": config.n,
        "n_trials": config.n_trials,
        "oracle": {"value": oracle.value, "std_error": oracle.std_error,
                   "s": config.palm_s, "t": config.palm_t},
        "stats": stats, "verdicts": verdicts, "rerun_used": rerun_used,
    }
    if rerun_used:
        summary["first_attempt_verdicts"] = first_verdicts
    return ExperimentResult(config=config, records=tuple(records), summary=summary)


_RUNNERS = {
    "divergence": run_divergence,
    "poisson": run_poisson,
    "vanishing": run_vanishing,
    "palm": palm_mean_check,
}


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    return _RUNNERS[config.mode](config, threads=threads)
