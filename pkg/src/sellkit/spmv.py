"""Sparse matrix-vector multiplication with a data-parallel execution contract.

Work is partitioned by rows (CRS) or chunks (SELL); each unit's output rows are
owned by exactly one worker, so results are bitwise independent of thread count
and scheduling.  "static" hands each worker one contiguous block; "guided1"
hands out single units from a shared queue.
"""

import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backend
from .errors import DimensionError, ParameterError

SCHEDULINGS = ("static", "guided1")


def _check_scheduling(scheduling):
    if scheduling not in SCHEDULINGS:
        raise ParameterError(
            f"scheduling must be one of {SCHEDULINGS}, got {scheduling!r}"
        )


def _as_input_vector(x, n_cols):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != n_cols:
        raise DimensionError(f"x must be a vector of length {n_cols}")
    return x


def _as_output_vector(y, n, accumulate):
    if y is None:
        return np.zeros(n)
    if not (isinstance(y, np.ndarray) and y.dtype == np.float64
            and y.ndim == 1 and y.flags.c_contiguous and y.flags.writeable):
        raise ParameterError("y must be a writable contiguous float64 vector")
    if len(y) != n:
        raise DimensionError(f"y must have length {n}, got {len(y)}")
    return y


def _run_partitioned(run_range, n_units, threads, scheduling):
    _check_scheduling(scheduling)
    threads = int(threads)
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    if threads == 1 or n_units <= 1:
        run_range(0, n_units)
        return
    if scheduling == "static":
        bounds = np.linspace(0, n_units, threads + 1).astype(int)
        spans = [(int(bounds[t]), int(bounds[t + 1])) for t in range(threads)]
        spans = [s for s in spans if s[1] > s[0]]
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            list(pool.map(lambda s: run_range(*s), spans))
    else:
        lock = threading.Lock()
        cursor = [0]

        def worker():
            while True:
                with lock:
                    u = cursor[0]
                    cursor[0] += 1
                if u >= n_units:
                    return
                run_range(u, u + 1)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda _: worker(), range(threads)))


def spmv_crs(m, x, y=None, accumulate=False, threads=1, scheduling="static",
             kernels=None):
    """y (+)= m @ x for a CRS matrix; returns y."""
    k = kernels or backend.kernels
    x = _as_input_vector(x, m.n_cols)
    y = _as_output_vector(y, m.n_rows, accumulate)

    def run_range(r0, r1):
        k.spmv_crs_range(m.rpt, m.col, m.val, x, y, r0, r1, accumulate)

    _run_partitioned(run_range, m.n_rows, threads, scheduling)
    return y


def spmv_crs_unrolled(m, x, y=None, accumulate=False, threads=1,
                      scheduling="static", kernels=None):
    """Same contract as spmv_crs; processes four nonzeros per inner step with a
    remainder loop, combining the four partial sums once per row."""
    k = kernels or backend.kernels
    x = _as_input_vector(x, m.n_cols)
    y = _as_output_vector(y, m.n_rows, accumulate)

    def run_range(r0, r1):
        k.spmv_crs_unrolled_range(m.rpt, m.col, m.val, x, y, r0, r1, accumulate)

    _run_partitioned(run_range, m.n_rows, threads, scheduling)
    return y


def spmv_sell(m, x, y=None, accumulate=False, threads=1, scheduling="static",
              kernels=None):
    """y (+)= m @ x for a chunked matrix.

    y is indexed by stored rows and has length n_rows_padded; use
    unpermute_vector(y, m.perm) to recover the original row order.  If the
    matrix was built with permute_cols, x must be given in stored-row order
    (permute_vector(x, m.perm)).
    """
    k = kernels or backend.kernels
    x = _as_input_vector(x, m.n_cols)
    y = _as_output_vector(y, m.n_rows_padded, accumulate)

    def run_range(c0, c1):
        k.spmv_sell_range(m.cs, m.cl, m.C, m.col, m.val, x, y, c0, c1, accumulate)

    _run_partitioned(run_range, m.n_chunks, threads, scheduling)
    return y
