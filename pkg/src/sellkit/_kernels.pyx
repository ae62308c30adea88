# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Loop structure mirrors the pure numpy backend: each row's partial sum starts
from zero, products are added in ascending slot order, and the previous y is
combined exactly once per row.
"""

from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport free, malloc

import numpy as np

NAME = "compiled"


def spmv_crs_range(const int64_t[::1] rpt, const int32_t[::1] col,
                   const double[::1] val, const double[::1] x, double[::1] y,
                   Py_ssize_t r0, Py_ssize_t r1, bint accumulate):
    cdef Py_ssize_t i
    cdef int64_t j
    cdef double tmp
    with nogil:
        for i in range(r0, r1):
            tmp = 0.0
            for j in range(rpt[i], rpt[i + 1]):
                tmp = tmp + val[j] * x[col[j]]
            if accumulate:
                y[i] = y[i] + tmp
            else:
                y[i] = tmp


def spmv_crs_unrolled_range(const int64_t[::1] rpt, const int32_t[::1] col,
                            const double[::1] val, const double[::1] x,
                            double[::1] y, Py_ssize_t r0, Py_ssize_t r1,
                            bint accumulate):
    cdef Py_ssize_t i
    cdef int64_t s, e, m, j
    cdef double t0, t1, t2, t3, acc
    with nogil:
        for i in range(r0, r1):
            s = rpt[i]
            e = rpt[i + 1]
            m = s + ((e - s) & ~<int64_t>3)
            t0 = t1 = t2 = t3 = 0.0
            j = s
            while j < m:
                t0 = t0 + val[j] * x[col[j]]
                t1 = t1 + val[j + 1] * x[col[j + 1]]
                t2 = t2 + val[j + 2] * x[col[j + 2]]
                t3 = t3 + val[j + 3] * x[col[j + 3]]
                j = j + 4
            if accumulate:
                acc = y[i] + (((t0 + t1) + t2) + t3)
            else:
                acc = ((t0 + t1) + t2) + t3
            # remainder loop
            while j < e:
                acc = acc + val[j] * x[col[j]]
                j = j + 1
            y[i] = acc


def spmv_sell_range(const int64_t[::1] cs, const int32_t[::1] cl, int C,
                    const int32_t[::1] col, const double[::1] val,
                    const double[::1] x, double[::1] y,
                    Py_ssize_t c0, Py_ssize_t c1, bint accumulate):
    cdef Py_ssize_t i, r
    cdef int64_t j, flat, row0
    cdef double* tmp = <double*>malloc(C * sizeof(double))
    if tmp == NULL:
        raise MemoryError("chunk accumulator allocation failed")
    try:
        with nogil:
            for i in range(c0, c1):
                for r in range(C):
                    tmp[r] = 0.0
                flat = cs[i]
                for j in range(cl[i]):
                    for r in range(C):
                        tmp[r] = tmp[r] + val[flat + r] * x[col[flat + r]]
                    flat = flat + C
                row0 = <int64_t>i * C
                if accumulate:
                    for r in range(C):
                        y[row0 + r] = y[row0 + r] + tmp[r]
                else:
                    for r in range(C):
                        y[row0 + r] = tmp[r]
    finally:
        free(tmp)


def lru_stream_misses(const int64_t[::1] lines, int64_t cache_lines,
                      int64_t n_line_slots):
    """Count misses of a fully-associative LRU cache replaying a line-id stream.

    Uses a doubly-linked MRU list over a dense table of line ids; O(1) per access.
    """
    cdef Py_ssize_t n = lines.shape[0]
    cdef int64_t head = n_line_slots
    cdef int64_t tail = n_line_slots + 1
    if n == 0:
        return 0
    if cache_lines <= 0:
        return n
    nxt_arr = np.empty(n_line_slots + 2, dtype=np.int64)
    prv_arr = np.empty(n_line_slots + 2, dtype=np.int64)
    present_arr = np.zeros(n_line_slots, dtype=np.uint8)
    cdef int64_t[::1] nxt = nxt_arr
    cdef int64_t[::1] prv = prv_arr
    cdef unsigned char[::1] present = present_arr
    cdef int64_t misses = 0, size = 0, ln, victim
    cdef Py_ssize_t k
    with nogil:
        nxt[head] = tail
        prv[tail] = head
        for k in range(n):
            ln = lines[k]
            if present[ln]:
                # unlink, then reinsert at MRU position
                nxt[prv[ln]] = nxt[ln]
                prv[nxt[ln]] = prv[ln]
            else:
                misses = misses + 1
                if size == cache_lines:
                    victim = prv[tail]
                    nxt[prv[victim]] = tail
                    prv[tail] = prv[victim]
                    present[victim] = 0
                else:
                    size = size + 1
                present[ln] = 1
            nxt[ln] = nxt[head]
            prv[nxt[head]] = ln
            prv[ln] = head
            nxt[head] = ln
    return misses


def read_sum(const double[::1] a):
    cdef Py_ssize_t i = 0, n = a.shape[0]
    cdef Py_ssize_t n8 = n - (n % 8)
    cdef double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0
    cdef double rest = 0
    with nogil:
        while i < n8:
            s0 += a[i]
            s1 += a[i + 1]
            s2 += a[i + 2]
            s3 += a[i + 3]
            s4 += a[i + 4]
            s5 += a[i + 5]
            s6 += a[i + 6]
            s7 += a[i + 7]
            i += 8
        while i < n:
            rest += a[i]
            i += 1
    return (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) + rest


def copy_array(const double[::1] src, double[::1] dst):
    cdef Py_ssize_t i, n = src.shape[0]
    if dst.shape[0] != n:
        raise ValueError("source and destination lengths differ")
    with nogil:
        for i in range(n):
            dst[i] = src[i]
