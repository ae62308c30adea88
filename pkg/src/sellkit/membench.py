"""Main-memory bandwidth microbenchmarks: array copy (pessimistic baseline)
and read-accumulate (optimistic baseline).

The array must be much larger than the last level cache for the figures to
mean main-memory bandwidth; the command-line front end defaults to four times
the detected cache size.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .errors import ParameterError, ResourceError

# the copy loop's write misses load each destination line before storing it,
# so the loop moves 24 bytes per element while its arithmetic counts 16
WRITE_ALLOCATE_FACTOR = 1.5


@dataclass
class MemBenchResult:
    kind: str
    n_elems: int
    reps: int
    threads: int
    seconds: float
    gbps: float
    gbps_raw: float
    checksum: float


def _alloc(n_elems, count):
    try:
        return [np.full(n_elems, 0.25 + 0.5 * i, dtype=np.float64)
                for i in range(count)]
    except MemoryError as exc:
        raise ResourceError(
            f"cannot allocate {count} x {n_elems * 8} bytes for the benchmark"
        ) from exc


def _split(n_elems, threads):
    bounds = np.linspace(0, n_elems, threads + 1).astype(int)
    return [(int(bounds[t]), int(bounds[t + 1])) for t in range(threads)
            if bounds[t + 1] > bounds[t]]


def microbench_read_sum(n_elems, reps, threads=1, timer=None, kernels=None):
    """Read bandwidth: reported GB/s = 8 * n_elems * reps / seconds.

    The reduction result is returned as a checksum so the reads are consumed.
    """
    if n_elems < 1 or reps < 1:
        raise ParameterError("n_elems and reps must be >= 1")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    clock = timer or time.perf_counter
    k = kernels or backend.kernels
    (a,) = _alloc(n_elems, 1)
    spans = _split(n_elems, threads)

    def one_pass():
        if len(spans) == 1:
            return k.read_sum(a)
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            return sum(pool.map(lambda s: k.read_sum(a[s[0]:s[1]]), spans))

    checksum = one_pass()  # warm-up
    t0 = clock()
    for _ in range(reps):
        checksum += one_pass()
    t1 = clock()
    seconds = max(t1 - t0, 1e-12)
    gbps = 8.0 * n_elems * reps / seconds / 1e9
    return MemBenchResult(
        kind="read_sum", n_elems=n_elems, reps=reps, threads=len(spans),
        seconds=seconds, gbps=gbps, gbps_raw=gbps, checksum=float(checksum),
    )


def microbench_copy(n_elems, reps, threads=1, timer=None, kernels=None):
    """Copy bandwidth.  The raw figure counts 16 bytes per element (one read,
    one store); the reported figure multiplies by 1.5 for the write-allocate
    transfer of each destination line."""
    if n_elems < 1 or reps < 1:
        raise ParameterError("n_elems and reps must be >= 1")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    clock = timer or time.perf_counter
    k = kernels or backend.kernels
    a, b = _alloc(n_elems, 2)
    spans = _split(n_elems, threads)

    def one_pass():
        if len(spans) == 1:
            k.copy_array(a, b)
            return
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            list(pool.map(lambda s: k.copy_array(a[s[0]:s[1]], b[s[0]:s[1]]), spans))

    one_pass()  # warm-up
    t0 = clock()
    for _ in range(reps):
        one_pass()
    t1 = clock()
    seconds = max(t1 - t0, 1e-12)
    gbps_raw = 16.0 * n_elems * reps / seconds / 1e9
    return MemBenchResult(
        kind="copy", n_elems=n_elems, reps=reps, threads=len(spans),
        seconds=seconds, gbps=gbps_raw * WRITE_ALLOCATE_FACTOR,
        gbps_raw=gbps_raw, checksum=float(b[0] + b[-1]),
    )


def detect_llc_bytes(default=32 * 1024 * 1024):
    """Size of the largest CPU cache reported by the kernel, or the default."""
    best = 0
    for size_file in sorted(Path("/sys/devices/system/cpu/cpu0/cache").glob(
            "index*/size")):
        try:
            text = size_file.read_text().strip()
        except OSError:
            continue
        mult = 1
        if text.endswith("K"):
            mult, text = 1024, text[:-1]
        elif text.endswith("M"):
            mult, text = 1024 * 1024, text[:-1]
        try:
            best = max(best, int(text) * mult)
        except ValueError:
            continue
    return best or default
