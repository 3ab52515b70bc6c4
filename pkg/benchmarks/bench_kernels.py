"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--sizes 100 500 2000] [--repeat 5]

Prints one row per (kernel, n) with the best-of-``repeat`` wall time of each
backend and the speedup. The first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np

from bidegree import kernels
from bidegree.estimation import P0Params
from bidegree.graph import degrees, sample_p0
from bidegree.noise import PrivacyConfig, release_bidegree


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    params = P0Params.linear(n, np.log(np.log(n)))
    d = degrees(sample_p0(params, rng))
    z = release_bidegree(d, PrivacyConfig(2.0), rng)
    zp = np.ascontiguousarray(z.outdeg, dtype=np.int64)
    zm = np.ascontiguousarray(z.indeg, dtype=np.int64)
    a, b = np.ascontiguousarray(params.alpha), np.ascontiguousarray(params.beta)
    return {
        "greedy_projection": (kernels._greedy_projection_np, kernels._greedy_projection_nb, (zp, zm)),
        "expected_degrees": (kernels._expected_degrees_np, kernels._expected_degrees_nb, (a, b)),
        "edge_variances": (kernels._edge_variances_np, kernels._edge_variances_nb, (a, b)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18} {'n':>6} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    for n in args.sizes:
        for name, (f_np, f_nb, fargs) in cases(n, rng).items():
            t_np = best_of(f_np, fargs, args.repeat)
            t_nb = best_of(f_nb, fargs, args.repeat)
            print(f"{name:<18} {n:>6} {1e3 * t_np:>11.3f} {1e3 * t_nb:>11.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
