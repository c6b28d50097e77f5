"""Time the numba and numpy flavours of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Compilation happens in a warm-up call and is excluded from the timings.
"""
import argparse
import time

import numpy as np

from unibw import _kernels as k
from unibw._accel import HAVE_NUMBA


def _best(fn, args, repeat):
    fn(*args)  # warm-up / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    xs = np.sort(rng.uniform(0.0, 2.0, 100_000))
    anchors = np.linspace(0.5, 1.5, 2000)
    yield "window_sums", (xs, anchors, 0.01, 1, np.zeros(0), 1.0, 1.0)

    B = rng.normal(size=(8, 4)) * 0.3
    y = rng.normal(size=8)
    yield "linf_distance", (B, y, 1e-10, 10000)

    V = (rng.uniform(size=(64, 1)) <= rng.uniform(size=(1, 2000))).astype(float)
    yield "greedy_packing", (V, 0.3)

    w = rng.poisson(10.0, 1000).astype(float)
    yield "binned_pair_counts", (w,)

    vals = rng.normal(size=(10_000, 4))
    yield "max_abs_partial_sum", (vals,)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba unavailable; both columns time the numpy-compatible code path")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, a in cases(rng):
        t_nb = _best(getattr(k, name + "_nb"), a, args.repeat)
        t_np = _best(getattr(k, name + "_np"), a, args.repeat)
        print(f"{name:<22}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
