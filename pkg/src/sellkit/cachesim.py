"""Estimate kernel memory traffic without hardware counters.

The matrix data (val+col, 12 bytes per stored slot including padding) and the
result vector (a 16-byte load/store pair per output row) are pure streams.
Only accesses to x pass through a fully-associative LRU cache of the given
size; each miss transfers one cache line.  Padding slots are excluded from the
x stream: they gather x[0] in the kernels, but the model's worst case
(alpha = line_bytes/8) is defined over actual entries, and counting the
always-hot x[0] line would let pathological occupancies exceed it.
"""

import numpy as np

from . import backend
from .errors import ParameterError
from .formats import CRSMatrix, SellMatrix


def _check_cache_params(cache_bytes, line_bytes):
    if line_bytes < 8 or line_bytes & (line_bytes - 1):
        raise ParameterError(
            f"line_bytes must be a power of two >= 8, got {line_bytes}"
        )
    if cache_bytes < 0 or cache_bytes % line_bytes:
        raise ParameterError(
            f"cache_bytes ({cache_bytes}) must be a non-negative multiple of "
            f"line_bytes ({line_bytes})"
        )


def _sell_x_stream(m):
    """Column indices of real entries in kernel traversal order (per chunk:
    slot-major, then lane)."""
    parts = []
    for i in range(m.n_chunks):
        cl = int(m.cl[i])
        if cl == 0:
            continue
        start = int(m.cs[i])
        block = m.col[start:start + cl * m.C].reshape(cl, m.C)
        lens = m.row_lengths[i * m.C:(i + 1) * m.C]
        mask = np.arange(cl)[:, None] < lens[None, :]
        parts.append(block[mask])
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts).astype(np.int64)


def simulate_rhs_traffic(m, cache_bytes, line_bytes=64, kernels=None):
    """Replay the kernel's access stream and return total memory traffic in bytes.

    Works for CRS and chunked matrices.  Traffic is non-increasing in
    cache_bytes; with a cache at least as large as x, every x line is loaded
    exactly once.
    """
    _check_cache_params(cache_bytes, line_bytes)
    k = kernels or backend.kernels
    elems_per_line = line_bytes // 8
    cache_lines = cache_bytes // line_bytes
    n_line_slots = (max(m.n_cols, 1) - 1) // elems_per_line + 1

    if isinstance(m, SellMatrix):
        stream = _sell_x_stream(m)
        matrix_bytes = 12 * m.stored_slots
        lhs_bytes = 16 * m.n_rows_padded
    elif isinstance(m, CRSMatrix):
        stream = m.col.astype(np.int64)
        matrix_bytes = 12 * m.nnz
        lhs_bytes = 16 * m.n_rows
    else:
        raise ParameterError(f"cannot simulate a {type(m).__name__}")

    lines = stream // elems_per_line
    misses = k.lru_stream_misses(lines, cache_lines, n_line_slots)
    return matrix_bytes + int(misses) * line_bytes + lhs_bytes
