#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the three hot kernels on representative workloads:

* segment_theta          -- accumulated-phase oracle inner sum,
* pair_correlation_batch -- exact lag correlation of the sign function,
* ou_phase_paths         -- Monte-Carlo noise-path phase accumulation,

and prints a side-by-side table.  Run from the repository root:

    python benchmarks/kernel_benchmark.py [--paths 20000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from ddmag import SequenceKind, SequenceSpec, sign_function
from ddmag import _kernels
from ddmag._backend import HAS_NUMBA


def timeit(fn, *args, repeats=5):
    fn(*args)  # warm-up (includes jit compilation on the numba path)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_segment_theta(repeats):
    sf = sign_function(SequenceSpec(SequenceKind.CPMG, 200, 0.47e-6))
    amps = np.array([125.0, 150.0, 80.0])
    freqs = np.array([1.0e6, 1.75e6, 0.6e6])
    phases = np.array([0.4, -1.1, 2.0])

    def run(fn):
        for _ in range(200):
            fn(sf.boundaries_s, sf.signs, amps, freqs, phases, 28.0)

    rows = [("numpy", timeit(run, _kernels.segment_theta_numpy, repeats=repeats))]
    if HAS_NUMBA:
        rows.append(("numba", timeit(run, _kernels.segment_theta_numba, repeats=repeats)))
    return "segment_theta (200 calls, N=200, 3 components)", rows


def bench_pair_correlation(repeats):
    sf = sign_function(SequenceSpec(SequenceKind.CPMG, 64, 0.5e-6))
    lags = np.linspace(0.0, sf.boundaries_s[-1], 1600)

    def run(fn):
        fn(sf.boundaries_s, sf.signs, lags)

    rows = [("numpy", timeit(run, _kernels.pair_correlation_batch_numpy, repeats=repeats))]
    if HAS_NUMBA:
        rows.append(("numba", timeit(run, _kernels.pair_correlation_batch_numba,
                                     repeats=repeats)))
    return "pair_correlation_batch (1600 lags, N=64)", rows


def bench_ou_paths(n_paths, repeats):
    sf = sign_function(SequenceSpec(SequenceKind.PDD, 20, 0.6667e-6))
    seg_len = np.diff(sf.boundaries_s)
    substeps = np.full(sf.signs.shape, 48, dtype=np.int64)
    dts = seg_len / substeps

    def run(fn):
        fn(sf.signs, substeps, dts, 3.6e6, 25e-6, n_paths, 7)

    rows = [("numpy", timeit(run, _kernels.ou_phase_paths_numpy, repeats=repeats))]
    if HAS_NUMBA:
        rows.append(("numba", timeit(run, _kernels.ou_phase_paths_numba, repeats=repeats)))
    return f"ou_phase_paths ({n_paths} paths, 20 segments x 48 substeps)", rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"numba available: {HAS_NUMBA}")
    print(f"{'benchmark':<55} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    print("-" * 88)
    for title, rows in (
        bench_segment_theta(args.repeats),
        bench_pair_correlation(args.repeats),
        bench_ou_paths(args.paths, args.repeats),
    ):
        times = dict(rows)
        numpy_ms = times["numpy"] * 1e3
        if "numba" in times:
            numba_ms = times["numba"] * 1e3
            print(f"{title:<55} {numpy_ms:>8.2f}ms {numba_ms:>8.2f}ms "
                  f"{times['numpy'] / times['numba']:>7.1f}x")
        else:
            print(f"{title:<55} {numpy_ms:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
