"""Synthetic matrix generators for model validation and benchmarking.

All generators are pure functions of their parameters and seed and return
canonical triplet matrices.
"""

import numpy as np

from .errors import ParameterError
from .formats import COOMatrix, OFFSET_DTYPE, canonicalize_coo


def gen_worst_case(n_chunks, C, seed=0):
    """Adversarial occupancy pattern: N = n_chunks*C rows where each block of C
    rows contains one fully populated row (placed first in the block, so sorting
    has work to do) and C-1 rows with a single diagonal entry.

    Without sorting every chunk is padded to the full row, giving the minimal
    occupancy (N + C - 1) / (C*N); a sorting scope of C*C separates full rows
    into their own chunks and restores occupancy 1 when n_chunks is a multiple
    of C.
    """
    if n_chunks < 1:
        raise ParameterError(f"n_chunks must be >= 1, got {n_chunks}")
    if C < 2:
        raise ParameterError(f"C must be >= 2, got {C}")
    n = n_chunks * C
    full_rows = np.arange(n_chunks, dtype=OFFSET_DTYPE) * C
    single_rows = np.setdiff1d(np.arange(n, dtype=OFFSET_DTYPE), full_rows)
    rows = np.concatenate([np.repeat(full_rows, n), single_rows])
    cols = np.concatenate([np.tile(np.arange(n, dtype=OFFSET_DTYPE), n_chunks),
                           single_rows])
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 1.0, size=len(rows))
    return canonicalize_coo(COOMatrix(n, n, rows, cols, vals))


def gen_dense(n, seed=0):
    """Fully populated n x n matrix."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rows = np.repeat(np.arange(n, dtype=OFFSET_DTYPE), n)
    cols = np.tile(np.arange(n, dtype=OFFSET_DTYPE), n)
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 1.0, size=n * n)
    return COOMatrix(n, n, rows, cols, vals)


def gen_banded(n, half_bw, fill=1.0, seed=0):
    """Band matrix with |i - j| <= half_bw.  With fill < 1, off-diagonal band
    entries are kept with the given probability (diagonal always kept, so no
    row is empty)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if half_bw < 0 or half_bw >= n:
        raise ParameterError(f"half_bw must be in [0, n), got {half_bw}")
    if not 0.0 < fill <= 1.0:
        raise ParameterError(f"fill must be in (0, 1], got {fill}")
    width = 2 * half_bw + 1
    i = np.repeat(np.arange(n, dtype=OFFSET_DTYPE), width)
    j = i + np.tile(np.arange(-half_bw, half_bw + 1, dtype=OFFSET_DTYPE), n)
    keep = (j >= 0) & (j < n)
    if fill < 1.0:
        rng_keep = np.random.default_rng(seed + 1)
        keep &= (rng_keep.random(len(j)) < fill) | (i == j)
    rows, cols = i[keep], j[keep]
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 1.0, size=len(rows))
    return COOMatrix(n, n, rows, cols, vals)


def gen_skewed(n, base_len, spike_len, spike_count, seed=0):
    """Matrix with a heavily skewed row-length distribution: spike_count rows
    of length spike_len spread evenly over n otherwise-uniform rows of length
    base_len.  Reproduces the high coefficient-of-variation regime of web-graph
    matrices (one huge row among millions of short ones)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not 1 <= base_len <= n:
        raise ParameterError(f"base_len must be in [1, n], got {base_len}")
    if not 1 <= spike_len <= n:
        raise ParameterError(f"spike_len must be in [1, n], got {spike_len}")
    if not 0 <= spike_count <= n:
        raise ParameterError(f"spike_count must be in [0, n], got {spike_count}")
    lengths = np.full(n, base_len, dtype=OFFSET_DTYPE)
    if spike_count:
        spikes = np.unique(np.linspace(0, n - 1, spike_count).astype(OFFSET_DTYPE))
        lengths[spikes] = spike_len
    total = int(lengths.sum())
    rows = np.repeat(np.arange(n, dtype=OFFSET_DTYPE), lengths)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    k = np.arange(total, dtype=OFFSET_DTYPE) - np.repeat(starts, lengths)
    cols = (rows + k) % n
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 1.0, size=total)
    return canonicalize_coo(COOMatrix(n, n, rows, cols, vals))
