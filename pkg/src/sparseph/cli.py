"""Command-line interface.

Exit codes: 0 success (all verdicts pass), 1 runtime failure (unreadable
or malformed input files, I/O), 2 invalid flags or config semantics,
3 statistical verdict failure.  The distinction lets CI separate flaky
statistics from actual bugs.

All floats are serialized with 17 significant digits and infinite deaths
as the literal "inf", so repeated runs produce byte-identical output
regardless of worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from . import __version__, jsonio, kernels
from .cech import build_filtration
from .limits import (MASS_METHODS, estimate_betti_limit,
                     estimate_connected_volume, estimate_limit_measure,
                     estimate_window_mass, intensity_constant)
from .persistence import (Rectangle, compute_diagram, diagram_csv,
                          save_diagram_csv)
from .regimes import ExperimentConfig, RadiusSpec, classify, normalizer, run_experiment
from .sampling import (Density, SampleSpec, TruncatedGaussian, UniformCube,
                       load_points_csv, sample, save_cloud_csv)

__all__ = ["main"]


def _parse_radius(text: str) -> RadiusSpec:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise ValueError(f"--radius expects 'a,gamma[,beta]', got {text!r}")
    a, gamma = float(parts[0]), float(parts[1])
    beta = float(parts[2]) if len(parts) == 3 else 0.0
    return RadiusSpec(a=a, gamma=gamma, beta=beta)


def _parse_density(text: str, d: int) -> Density:
    kind, _, params = text.partition(":")
    if kind == "cube":
        side = float(params) if params else 1.0
        return UniformCube(d=d, side=side)
    if kind == "gaussian":
        parts = params.split(",") if params else []
        if len(parts) != 2:
            raise ValueError(
                f"--density gaussian expects 'gaussian:sigma,radius', got {text!r}")
        return TruncatedGaussian(d=d, sigma=float(parts[0]), radius=float(parts[1]))
    raise ValueError(f"unknown density {text!r}; expected cube:side or "
                     "gaussian:sigma,radius")


def _parse_rect(text: str, left_closed: bool) -> Rectangle:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"--rect expects 'birth_lo,birth_hi,death_lo,death_hi', "
                         f"got {text!r}")
    values = [float(p) for p in parts]
    return Rectangle(birth_lo=values[0], birth_hi=values[1], death_lo=values[2],
                     death_hi=values[3], left_closed=left_closed)


def _meta() -> dict:
    return {"package": "sparseph", "version": __version__,
            "kernels": kernels.IMPLEMENTATION}


def _cmd_simulate(args) -> int:
    try:
        radius = _parse_radius(args.radius)
        density = _parse_density(args.density, args.d)
        report = classify(radius, args.k, args.d)
        if not args.cutoff_margin > 0:
            raise ValueError(f"--cutoff-margin must be positive, got {args.cutoff_margin}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    r_n = radius.radius(args.n)
    cloud = sample(density, SampleSpec(n=args.n, seed=args.seed,
                                       poissonized=args.poissonized))
    fc = build_filtration(cloud.points, args.k, cutoff=r_n * args.cutoff_margin)
    diag = compute_diagram(fc, args.k, scale=r_n)
    diag = dataclasses.replace(diag, cutoff=args.cutoff_margin)
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    cloud_path = stem + ".cloud.csv"
    meta_path = stem + ".meta.json"
    try:
        save_diagram_csv(diag, args.out)
        save_cloud_csv(cloud.points, cloud_path)
        jsonio.dump({
            "command": "simulate", "n": args.n, "d": args.d, "k": args.k,
            "seed": args.seed, "poissonized": args.poissonized,
            "radius": radius.to_dict(), "density": density.to_dict(),
            "r_n": r_n, "cutoff_margin": args.cutoff_margin,
            "normalizer": normalizer(radius, args.k, args.d, args.n),
            "regime": report.to_dict(), "n_points": cloud.n_points,
            "n_pairs": diag.n_pairs, "censored": diag.censored,
            "meta": _meta(),
        }, meta_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({diag.n_pairs} pairs), {cloud_path}, {meta_path}")
    return 0


def _cmd_diagram(args) -> int:
    if not (args.scale > 0 and math.isfinite(args.scale)):
        print(f"error: --scale must be positive and finite, got {args.scale}",
              file=sys.stderr)
        return 2
    if not args.cutoff > 0:
        print(f"error: --cutoff must be positive, got {args.cutoff}", file=sys.stderr)
        return 2
    try:
        points = load_points_csv(args.points, d=args.d)
    except (OSError, ValueError) as exc:
        print(f"error: {args.points}: {exc}", file=sys.stderr)
        return 1
    fc = build_filtration(points, args.k, cutoff=args.scale * args.cutoff)
    diag = compute_diagram(fc, args.k, scale=args.scale)
    diag = dataclasses.replace(diag, cutoff=args.cutoff)
    if args.out:
        try:
            save_diagram_csv(diag, args.out)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {args.out} ({diag.n_pairs} pairs)")
    else:
        sys.stdout.write(diagram_csv(diag))
    return 0


def _cmd_limits(args) -> int:
    try:
        out = _limits_estimate(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(jsonio.dumps(out))
    return 0


def _limits_estimate(args) -> dict:
    quantity = args.quantity
    method = args.method
    if quantity == "constant":
        density = _parse_density(args.density, args.d)
        est = intensity_constant(density, args.k, mc_samples=args.samples,
                                 seed=args.seed, threads=args.threads)
        method = None
    elif quantity == "mass":
        if args.rect is None:
            raise ValueError("mass needs --rect")
        rect = _parse_rect(args.rect, args.left_closed)
        est = estimate_window_mass(rect, args.k, args.d, args.samples,
                                   args.seed, method=method, threads=args.threads)
    elif quantity == "measure":
        if args.rect is None:
            raise ValueError("measure needs --rect")
        rect = _parse_rect(args.rect, args.left_closed)
        density = _parse_density(args.density, args.d)
        est = estimate_limit_measure(rect, args.k, density, args.samples,
                                     args.seed, method=method, threads=args.threads)
    elif quantity == "betti-limit":
        density = _parse_density(args.density, args.d)
        if args.s is None or args.t is None:
            raise ValueError("betti-limit needs --s and --t")
        est = estimate_betti_limit(density, args.k, args.s, args.t, args.samples,
                                   args.seed, method=method, threads=args.threads)
    elif quantity == "connected-volume":
        if args.r is None:
            raise ValueError("connected-volume needs --r")
        est = estimate_connected_volume(args.k, args.d, args.r, args.samples,
                                        args.seed, threads=args.threads)
        method = None
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    return {"quantity": quantity, "value": est.value, "std_error": est.std_error,
            "n_samples": est.n_samples, "seed": est.seed, "method": method}


def _cmd_classify(args) -> int:
    try:
        radius = _parse_radius(args.radius)
        report = classify(radius, args.k, args.d)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(jsonio.dumps(report.to_dict()))
    return 0


def _cmd_verify(args) -> int:
    try:
        data = jsonio.load(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        config = ExperimentConfig.from_dict(data)
        if args.mode and args.mode != config.mode:
            config = dataclasses.replace(config, mode=args.mode)
        result = run_experiment(config, threads=args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(args.out, exist_ok=True)
        jsonio.write_jsonl(result.records, os.path.join(args.out, "results.jsonl"))
        jsonio.dump({"config": config.to_dict(), "summary": result.summary,
                     "meta": _meta()},
                    os.path.join(args.out, "summary.json"))
        if args.plots:
            _write_plots(result, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for v in result.summary["verdicts"]:
        where = "" if v["rect_index"] is None else f" rect={v['rect_index']}"
        print(f"{'PASS' if v['pass'] else 'FAIL'} {v['name']}{where}: "
              f"observed={v['observed']} expected={v['expected']} "
              f"tolerance={v['tolerance']}")
    if result.passed:
        print(f"ok: all {len(result.summary['verdicts'])} verdicts pass")
        return 0
    print("statistical verdict failure", file=sys.stderr)
    return 3


def _write_plots(result, out_dir: str) -> None:
    try:
        import matplotlib
    except ImportError as exc:
        raise OSError(f"--plots needs matplotlib: {exc}")
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    summary = result.summary
    mode = summary["mode"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if mode == "divergence":
        grid = [entry["n"] for entry in summary["per_n"]]
        for oracle in summary["oracles"]:
            i = oracle["rect_index"]
            ratios = [entry["rects"][i]["ratio"] for entry in summary["per_n"]]
            ax.plot(grid, ratios, marker="o", label=f"window {i}")
            ax.axhline(oracle["value"], linestyle="--", linewidth=0.8)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("mean count / normalizer")
        ax.legend()
    elif mode == "poisson":
        import numpy as np
        counts = []
        for record in result.records:
            if record["kind"] == "counts" and record["rect_index"] == 0:
                counts.extend(record["counts"])
        counts = np.asarray(counts)
        mu = summary["oracles"][0]["value"]
        top = int(counts.max(initial=0)) + 1
        xs = np.arange(top + 1)
        emp = np.bincount(counts, minlength=top + 1) / counts.size
        pois = np.exp(xs * math.log(mu) - mu
                      - np.array([math.lgamma(x + 1) for x in xs]))
        ax.bar(xs - 0.2, emp, width=0.4, label="empirical")
        ax.bar(xs + 0.2, pois, width=0.4, label=f"Poisson({mu:.3g})")
        ax.set_xlabel("window count")
        ax.set_ylabel("probability")
        ax.legend()
    else:
        names = [v["name"] for v in summary["verdicts"]]
        observed = [v["observed"] if v["observed"] is not None else 0.0
                    for v in summary["verdicts"]]
        expected = [v["expected"] for v in summary["verdicts"]]
        xs = range(len(names))
        ax.bar([x - 0.2 for x in xs], observed, width=0.4, label="observed")
        ax.bar([x + 0.2 for x in xs], expected, width=0.4, label="expected")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(names, rotation=20, ha="right", fontsize=7)
        ax.legend()
    ax.set_title(f"{mode} run")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "summary.svg"), metadata={"Date": None})
    plt.close(fig)


def _golden_estimate(entry: dict, threads: int | None):
    quantity = entry["quantity"]
    samples = entry["n_samples"]
    seed = entry["seed"]
    k = entry["k"]
    if quantity == "constant":
        return intensity_constant(Density.from_dict(entry["density"]), k,
                                  mc_samples=max(samples, 2), seed=seed or 0,
                                  threads=threads)
    if quantity == "mass":
        return estimate_window_mass(Rectangle.from_dict(entry["rect"]), k,
                                    entry["d"], samples, seed,
                                    method=entry.get("method", "interval"),
                                    threads=threads)
    if quantity == "measure":
        return estimate_limit_measure(Rectangle.from_dict(entry["rect"]), k,
                                      Density.from_dict(entry["density"]),
                                      samples, seed,
                                      method=entry.get("method", "interval"),
                                      threads=threads)
    if quantity == "betti-limit":
        return estimate_betti_limit(Density.from_dict(entry["density"]), k,
                                    entry["s"], entry["t"], samples, seed,
                                    method=entry.get("method", "interval"),
                                    threads=threads)
    if quantity == "connected-volume":
        return estimate_connected_volume(k, entry["d"], entry["r"], samples,
                                         seed, threads=threads)
    raise ValueError(f"unknown golden quantity {quantity!r}")


def _goldens_path() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "goldens.json")


def _cmd_goldens(args) -> int:
    path = args.file or _goldens_path()
    try:
        data = jsonio.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return 1
    failures = 0
    for entry in data["entries"]:
        est = _golden_estimate(entry, args.threads)
        if args.write:
            entry["value"] = est.value
            entry["std_error"] = est.std_error
            entry["kernels"] = kernels.IMPLEMENTATION
            print(f"{entry['name']}: {est.value:.17g}")
            continue
        same_lane = entry.get("kernels") == kernels.IMPLEMENTATION
        if same_lane:
            ok = est.value == entry["value"] and est.std_error == entry["std_error"]
            detail = "exact"
        else:
            gap = abs(est.value - entry["value"])
            band = 3.0 * math.hypot(est.std_error, entry["std_error"])
            ok = gap <= band
            detail = f"cross-lane, |gap|={gap:.3g} <= {band:.3g}"
        print(f"{'ok' if ok else 'MISMATCH'} {entry['name']}: "
              f"{est.value:.17g} vs {entry['value']:.17g} ({detail})")
        failures += 0 if ok else 1
    if args.write:
        jsonio.dump(data, path)
        print(f"wrote {path}")
        return 0
    if failures:
        print(f"{failures} golden mismatch(es)", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SPARSE_PH_THREADS or CPU count); "
                             "never changes numeric output")

    parser = argparse.ArgumentParser(
        prog="sparseph",
        description="Persistence diagrams of sparse random geometric complexes")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[shared],
                       help="sample a cloud and write its scaled diagram")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--radius", required=True, metavar="A,GAMMA[,BETA]")
    p.add_argument("--density", default="cube:1", metavar="KIND:PARAMS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--poissonized", action="store_true")
    p.add_argument("--cutoff-margin", type=float, default=1.5,
                   help="truncation in scaled units (default 1.5)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("diagram", parents=[shared],
                       help="diagram of a point-cloud CSV")
    p.add_argument("--points", required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--cutoff", type=float, required=True,
                   help="truncation in scaled units")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_diagram)

    p = sub.add_parser("limits", parents=[shared],
                       help="Monte Carlo limit quantities")
    p.add_argument("--quantity", required=True,
                   choices=["constant", "mass", "measure", "betti-limit",
                            "connected-volume"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--density", default="cube:1")
    p.add_argument("--rect", metavar="BLO,BHI,DLO,DHI")
    p.add_argument("--left-closed", action="store_true")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="interval", choices=list(MASS_METHODS))
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("classify", parents=[shared],
                       help="regime of a radius scaling")
    p.add_argument("--radius", required=True, metavar="A,GAMMA[,BETA]")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("verify", parents=[shared],
                       help="run an experiment config and judge its verdicts")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", default=None,
                   choices=["divergence", "poisson", "vanishing", "palm"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plots", action="store_true", help="write an SVG summary plot")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("goldens", parents=[shared],
                       help="check (or regenerate) stored oracle values")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--check", action="store_true", default=True)
    group.add_argument("--write", action="store_true")
    p.add_argument("--file", default=None, help="override the bundled goldens file")
    p.set_defaults(func=_cmd_goldens)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
