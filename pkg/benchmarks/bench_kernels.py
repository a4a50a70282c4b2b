"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Prints the best wall time per kernel and backend, and checks that both
backends return identical arrays.
"""
import argparse
import math
import timeit

import numpy as np

from cointmonitor import _kernels_py
from cointmonitor._rng import philox_key, raw_block
from cointmonitor.randomizer import gh_rule, thresholds

try:
    from cointmonitor import _kernels
except ImportError:
    _kernels = None


def theta_case(T_m=300, R=100):
    L = np.linspace(-2.0, 40.0, T_m)
    probs = np.ascontiguousarray(thresholds(L, gh_rule(2)))
    raw = raw_block(philox_key(1, "randomizer"), 1, T_m, R)
    return raw, R, probs


def sup_case(n_paths=2000, grid=10_000, eta=0.45):
    t = np.arange(1, grid + 1) / grid
    return n_paths, np.ascontiguousarray(t ** -eta), math.sqrt(1.0 / grid)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not available; timing the numpy backend only")

    raw, R, probs = theta_case()
    n_paths, w, sd = sup_case()
    results = {}
    for name, mod in backends.items():
        t1 = min(timeit.repeat(lambda: mod.theta_counts(raw, R, probs), number=20, repeat=args.repeat)) / 20
        t2 = min(timeit.repeat(lambda: mod.brownian_sup(np.random.PCG64(7), n_paths, w, sd),
                               number=1, repeat=args.repeat))
        results[name] = (mod.theta_counts(raw, R, probs), mod.brownian_sup(np.random.PCG64(7), n_paths, w, sd))
        print(f"{name:7s} theta_counts (T_m=300, R=100): {t1 * 1e3:8.3f} ms   "
              f"brownian_sup (2000 paths x 10000): {t2 * 1e3:8.1f} ms")
    if len(results) == 2:
        a, b = results["python"], results["cython"]
        same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"backends identical: {same}")


if __name__ == "__main__":
    main()
