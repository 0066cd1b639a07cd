"""Throughput comparison of the compiled and pure Python kernel lanes.

Runs the three hot kernels on identical inputs and prints configs/second
for each lane plus the speedup.  Usage:

    python benchmarks/bench_kernels.py [--configs N] [--repeats R]
"""

import argparse
import time

import numpy as np

from sparseph import _kernels_py

try:
    from sparseph import _kernels as _compiled
except ImportError:
    _compiled = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(name, make_args, runners, n_configs: int, repeats: int) -> None:
    args = make_args()
    print(f"\n{name} ({n_configs} configs)")
    base = None
    for label, module in runners:
        if module is None:
            print(f"  {label:<12} unavailable")
            continue
        fn = getattr(module, name)
        out_a = fn(*args)
        elapsed = _time(lambda: fn(*args), repeats)
        rate = n_configs / elapsed
        line = f"  {label:<12} {elapsed * 1e3:8.1f} ms   {rate:12.0f} configs/s"
        if base is None:
            base = elapsed
        else:
            line += f"   {base / elapsed:6.1f}x"
        print(line)
        # lanes must agree on what they compute
        ref = runners[0][1] and getattr(runners[0][1], name)(*args)
        if ref is not None:
            assert np.allclose(np.asarray(out_a, dtype=float),
                               np.asarray(ref, dtype=float), rtol=1e-9)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    lanes = [("pure-python", _kernels_py), ("compiled", _compiled)]

    triples = rng.uniform(0.0, 1.0, size=(args.configs, 3, 2))
    quads = rng.uniform(0.0, 1.0, size=(args.configs // 4, 4, 3))

    bench("meb_radii", lambda: (triples,), lanes, args.configs, args.repeats)
    bench("meb_radii", lambda: (quads,), lanes, quads.shape[0], args.repeats)
    bench("birth_death", lambda: (triples,), lanes, args.configs, args.repeats)
    bench("connected_within", lambda: (quads, 0.6), lanes, quads.shape[0],
          args.repeats)

    if _compiled is None:
        print("\ncompiled lane missing: build it with pip install -e . "
              "--no-build-isolation")


if __name__ == "__main__":
    main()
