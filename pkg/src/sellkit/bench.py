"""Timing harness for the multiplication kernels and the scheduling heuristic."""

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ParameterError
from .formats import CRSMatrix, SellMatrix
from .spmv import SCHEDULINGS, spmv_crs, spmv_crs_unrolled, spmv_sell


@dataclass
class SpmvRun:
    """Result of one timed multiplication series.

    flops counts useful work only (2 per stored entry, padding excluded);
    gflops = flops * repetitions / wall_seconds / 1e9 for the best trial.
    """

    flops: int
    wall_seconds: float
    repetitions: int
    gflops: float
    scheduling: str
    wall_seconds_median: float
    gflops_median: float
    checksum: float
    threads: int
    backend: str


def choose_scheduling(stats, llc_bytes):
    """Pick a work distribution: static when the working set fits in the last
    level cache or rows are uniform (zeta < 0.4), guided single-unit otherwise."""
    if llc_bytes <= 0:
        raise ParameterError(f"llc_bytes must be positive, got {llc_bytes}")
    if stats.footprint_bytes <= llc_bytes or stats.zeta < 0.4:
        return "static"
    return "guided1"


def bench_spmv(m, x, repetitions, scheduling="static", threads=1, trials=3,
               unrolled=False, timer=None, kernels=None):
    """Time a series of multiplications and report the best and median trial.

    One warm-up multiplication precedes timing.  Each trial runs the full
    repetition loop; the result vector is checksummed so the work cannot be
    considered dead.
    """
    if repetitions < 1:
        raise ParameterError(f"repetitions must be >= 1, got {repetitions}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if scheduling not in SCHEDULINGS:
        raise ParameterError(
            f"scheduling must be one of {SCHEDULINGS}, got {scheduling!r}"
        )
    clock = timer or time.perf_counter
    k = kernels or backend.kernels

    if isinstance(m, SellMatrix):
        if unrolled:
            raise ParameterError("the unrolled kernel variant applies to CRS only")
        mult = spmv_sell
        n_out = m.n_rows_padded
    elif isinstance(m, CRSMatrix):
        mult = spmv_crs_unrolled if unrolled else spmv_crs
        n_out = m.n_rows
    else:
        raise ParameterError(f"cannot benchmark a {type(m).__name__}")

    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.zeros(n_out)
    mult(m, x, y, accumulate=False, threads=threads, scheduling=scheduling,
         kernels=k)  # warm-up

    times = []
    for _ in range(trials):
        t0 = clock()
        for _ in range(repetitions):
            mult(m, x, y, accumulate=False, threads=threads,
                 scheduling=scheduling, kernels=k)
        t1 = clock()
        times.append(max(t1 - t0, 1e-12))

    flops = 2 * m.nnz
    best = min(times)
    med = statistics.median(times)
    return SpmvRun(
        flops=flops,
        wall_seconds=best,
        repetitions=repetitions,
        gflops=flops * repetitions / best / 1e9,
        scheduling=scheduling,
        wall_seconds_median=med,
        gflops_median=flops * repetitions / med / 1e9,
        checksum=float(np.sum(y)),
        threads=threads,
        backend=k.NAME,
    )
