"""Pure numpy kernel backend.

Every kernel accumulates each row's partial sum starting from zero, adding
products in ascending slot order, and combines it with the previous y once.
The compiled backend follows the identical order, so the two backends agree
bitwise on the plain CRS and chunked kernels (no FMA contraction on either
side).  The unrolled CRS kernel reduces its four partial sums with numpy and
matches the compiled one only to rounding.
"""

from collections import OrderedDict

import numpy as np

NAME = "python"


def _descending(lengths):
    """Stable sort indices by descending length plus per-j active counts."""
    order = np.argsort(-lengths, kind="stable")
    sorted_len = lengths[order]
    max_len = int(sorted_len[0]) if len(sorted_len) else 0
    # counts[j] = number of rows with length > j (prefix of the sorted order)
    counts = np.searchsorted(-sorted_len, -np.arange(max_len), side="left")
    return order, sorted_len, max_len, counts


def spmv_crs_range(rpt, col, val, x, y, r0, r1, accumulate):
    n = r1 - r0
    if n <= 0:
        return
    lengths = np.asarray(rpt[r0 + 1:r1 + 1]) - np.asarray(rpt[r0:r1])
    sums = np.zeros(n)
    if lengths.size and lengths.max() > 0:
        order, _, max_len, counts = _descending(lengths)
        starts = np.asarray(rpt)[r0 + order]
        for j in range(max_len):
            k = counts[j]
            idx = starts[:k] + j
            sums[order[:k]] += val[idx] * x[col[idx]]
    if accumulate:
        y[r0:r1] += sums
    else:
        y[r0:r1] = sums


def spmv_crs_unrolled_range(rpt, col, val, x, y, r0, r1, accumulate):
    for i in range(r0, r1):
        s = int(rpt[i])
        e = int(rpt[i + 1])
        quads = (e - s) // 4
        m = s + 4 * quads
        combined = 0.0
        if quads:
            seg = val[s:m] * x[col[s:m]]
            t = seg.reshape(quads, 4).sum(axis=0)
            combined = ((t[0] + t[1]) + t[2]) + t[3]
        acc = (y[i] if accumulate else 0.0) + combined
        for j in range(m, e):
            acc += val[j] * x[col[j]]
        y[i] = acc


def spmv_sell_range(cs, cl, C, col, val, x, y, c0, c1, accumulate):
    nch = c1 - c0
    if nch <= 0:
        return
    lanes = np.arange(C)
    sums = np.zeros(nch * C)
    cls = np.asarray(cl[c0:c1], dtype=np.int64)
    if cls.size and cls.max() > 0:
        order, _, max_len, counts = _descending(cls)
        base = np.asarray(cs)[c0 + order]
        row0 = order * C
        for j in range(max_len):
            k = counts[j]
            idx = ((base[:k, None] + j * C) + lanes).ravel()
            rows = (row0[:k, None] + lanes).ravel()
            sums[rows] += val[idx] * x[col[idx]]
    dest = slice(c0 * C, c1 * C)
    if accumulate:
        y[dest] += sums
    else:
        y[dest] = sums


def lru_stream_misses(lines, cache_lines, n_line_slots):
    """Count misses of a fully-associative LRU cache replaying a line-id stream."""
    misses = 0
    if cache_lines <= 0:
        return len(lines)
    lru = OrderedDict()
    for ln in lines.tolist():
        if ln in lru:
            lru.move_to_end(ln)
        else:
            misses += 1
            if len(lru) >= cache_lines:
                lru.popitem(last=False)
            lru[ln] = None
    return misses


def read_sum(a):
    return float(np.add.reduce(a))


def copy_array(src, dst):
    np.copyto(dst, src)
