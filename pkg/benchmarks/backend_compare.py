#!/usr/bin/env python3
"""Compare the compiled kernel core against the pure NumPy fallback.

Times spmv_crs, spmv_crs_unrolled, and spmv_sell on a set of synthetic
matrices with both backends and prints the speedup, plus a bitwise-equality
column showing that backend choice never changes results for the plain
kernels.

Usage: python benchmarks/backend_compare.py [--n 200000] [--reps 5]
"""

import argparse
import sys

import numpy as np

from sellkit import (HAS_COMPILED, bench_spmv, coo_to_crs, crs_to_sell,
                     gen_banded, gen_skewed, get_kernels, spmv_crs, spmv_sell)


def cases(n):
    yield "banded n_nzr=11", coo_to_crs(gen_banded(n, 5))
    yield "banded n_nzr=51", coo_to_crs(gen_banded(max(n // 5, 64), 25))
    yield ("skewed spikes",
           coo_to_crs(gen_skewed(n, base_len=4, spike_len=500,
                                 spike_count=max(n // 500, 1))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="matrix rows")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("-C", type=int, default=32)
    ap.add_argument("--sigma", type=int, default=512)
    args = ap.parse_args()

    if not HAS_COMPILED:
        print("compiled core is not available; nothing to compare",
              file=sys.stderr)
        return 1

    compiled = get_kernels("compiled")
    pure = get_kernels("python")
    header = (f"{'case':<18} {'kernel':<13} {'compiled GF/s':>13} "
              f"{'python GF/s':>12} {'speedup':>8} {'bitwise':>8}")
    print(header)
    print("-" * len(header))

    for name, m in cases(args.n):
        x = np.random.default_rng(7).uniform(-1, 1, m.n_cols)
        s = crs_to_sell(m, args.C, args.sigma)
        rows = [
            ("crs", m, False, spmv_crs, m),
            ("crs-unrolled", m, True, None, None),
            ("sell", s, False, spmv_sell, s),
        ]
        for kernel_name, mat, unrolled, direct, direct_mat in rows:
            rc = bench_spmv(mat, x, args.reps, trials=3, unrolled=unrolled,
                            kernels=compiled)
            rp = bench_spmv(mat, x, args.reps, trials=3, unrolled=unrolled,
                            kernels=pure)
            if direct is not None:
                same = np.array_equal(direct(direct_mat, x, kernels=compiled),
                                      direct(direct_mat, x, kernels=pure))
                bitwise = "yes" if same else "NO"
            else:
                bitwise = "n/a"  # unrolled partial sums differ by rounding
            print(f"{name:<18} {kernel_name:<13} {rc.gflops:>13.3f} "
                  f"{rp.gflops:>12.3f} {rc.gflops / rp.gflops:>7.1f}x "
                  f"{bitwise:>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
