#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths of the Monte Carlo harness (batch path simulation
with summary statistics, and batch log-likelihood-ratio evaluation) on both
backends and prints the speedup.

Usage:
    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import importlib
import time

import numpy as np

import inar1._kernels_py as pyk

try:
    cyk = importlib.import_module("inar1._kernels_cy")
except ImportError:
    cyk = None

GEO_ARGS = (pyk.KIND_GEOMETRIC, 0.5, np.empty(0, dtype=np.float64))


def time_call(fn, *args, min_repeat=1):
    best = float("inf")
    for _ in range(min_repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(quick):
    n = 500 if quick else 1000
    reps_sim = 500 if quick else 5000
    reps_lr = 100 if quick else 1000
    kind, param, table = GEO_ARGS
    theta = 1.0 - 4.0 / n**2
    seeds_sim = list(range(reps_sim))
    seeds_lr = list(range(reps_lr))

    cases = [
        ("batch_stats", lambda mod: time_call(
            mod.batch_stats, kind, param, table, theta, n, seeds_sim)),
        ("batch_loglr", lambda mod: time_call(
            mod.batch_loglr, kind, param, table, n, [2.0], 1.0, seeds_lr)),
    ]

    print(f"geometric(0.5), n={n}, reps: stats={reps_sim}, loglr={reps_lr}")
    header = f"{'kernel':<14} {'pure python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, runner in cases:
        t_py = runner(pyk)
        if cyk is not None:
            t_cy = runner(cyk)
            print(f"{name:<14} {t_py:>11.3f}s {t_cy:>11.3f}s {t_py / t_cy:>8.1f}x")
        else:
            print(f"{name:<14} {t_py:>11.3f}s {'n/a':>12} {'n/a':>9}")
    if cyk is None:
        print("compiled backend not built; install with Cython to compare")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()
    bench(args.quick)


if __name__ == "__main__":
    main()
