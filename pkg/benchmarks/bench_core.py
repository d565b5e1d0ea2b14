"""Compare the compiled and numpy radial kernels on random ray batches.

Usage: python3 benchmarks/bench_core.py [--rays N] [--repeat K]
"""
import argparse
import time

import numpy as np

from gaussperim.backend import implementations
from gaussperim._core_py import KERNEL_ADDITIVE, KERNEL_CUTOFF, KERNEL_PLAIN

# name: (alpha, s, n, kernel mode, delta)
CASES = {
    "gaussian-plain": (1.0, 0.5, 2, KERNEL_PLAIN, 0.0),
    "euclidean-cutoff": (0.0, 0.5, 2, KERNEL_CUTOFF, 0.1),
    "gaussian-additive": (1.0, 0.7, 2, KERNEL_ADDITIVE, 0.1),
}


def batch(rays, rng):
    lo = rng.uniform(0.0, 0.5, rays)
    hi = lo + rng.exponential(2.0, rays)
    c0 = 2.0 * rng.uniform(0.0, 4.0, rays)
    b = rng.normal(0.0, 1.0, rays)
    return lo, hi, c0, b


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rays", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    lo, hi, c0, b = batch(args.rays, rng)
    impls = implementations()
    print(f"{'case':20s} {'backend':8s} {'best [s]':>10s} {'Mrays/s':>9s} {'max rel diff':>13s}")
    for name, (alpha, s, n, kmode, delta) in CASES.items():
        ref = None
        for impl_name, fn in impls.items():
            best = np.inf
            for _ in range(args.repeat):
                t = time.perf_counter()
                out = fn(lo, hi, c0, b, alpha, s, n, 0, kmode, delta, 8)
                best = min(best, time.perf_counter() - t)
            if ref is None:
                ref = out
            diff = float(np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300)))
            print(f"{name:20s} {impl_name:8s} {best:10.4f} {args.rays / best / 1e6:9.2f} {diff:13.2e}")


if __name__ == "__main__":
    main()
