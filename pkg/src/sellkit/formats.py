"""Sparse matrix containers (COO, CRS, chunked SELL) and conversions between them.

Conventions shared by every container:

* values are float64, column indices are int32 (4-byte index semantics; matrices
  with a dimension >= 2**31 are rejected), row pointers / chunk offsets are int64
* containers are treated as immutable after construction
* ``perm`` maps original row index -> stored row index; ``inv_perm`` is its inverse
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, StructuralError

VALUE_DTYPE = np.float64
INDEX_DTYPE = np.int32
OFFSET_DTYPE = np.int64

# 4-byte index semantics: dimensions must stay below 2**31
MAX_DIM = 2**31


def _check_dims(n_rows, n_cols):
    if n_rows < 0 or n_cols < 0:
        raise StructuralError(f"negative matrix dimension ({n_rows}x{n_cols})")
    if n_rows >= MAX_DIM or n_cols >= MAX_DIM:
        raise StructuralError(
            f"matrix dimension {max(n_rows, n_cols)} exceeds 4-byte index range"
        )


@dataclass
class COOMatrix:
    """Triplet-form sparse matrix; the ingestion and ground-truth representation.

    Entries may be unsorted and may contain duplicate coordinates until
    canonicalize_coo is applied.  Explicit zeros count as stored entries.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        _check_dims(self.n_rows, self.n_cols)
        self.rows = np.ascontiguousarray(self.rows, dtype=OFFSET_DTYPE)
        self.cols = np.ascontiguousarray(self.cols, dtype=OFFSET_DTYPE)
        self.vals = np.ascontiguousarray(self.vals, dtype=VALUE_DTYPE)
        if not (self.rows.ndim == self.cols.ndim == self.vals.ndim == 1):
            raise StructuralError("entry arrays must be one-dimensional")
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise StructuralError("entry arrays must have equal length")
        if len(self.rows):
            rmin, rmax = self.rows.min(), self.rows.max()
            cmin, cmax = self.cols.min(), self.cols.max()
            if rmin < 0 or rmax >= self.n_rows:
                bad = int(self.rows[(self.rows < 0) | (self.rows >= self.n_rows)][0])
                raise StructuralError(
                    f"row index {bad} out of bounds for {self.n_rows} rows"
                )
            if cmin < 0 or cmax >= self.n_cols:
                bad = int(self.cols[(self.cols < 0) | (self.cols >= self.n_cols)][0])
                raise StructuralError(
                    f"column index {bad} out of bounds for {self.n_cols} columns"
                )

    @property
    def nnz(self):
        return len(self.vals)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def is_canonical(self):
        """True if entries are sorted by (row, col) with no duplicate coordinates."""
        if self.nnz <= 1:
            return True
        dr = np.diff(self.rows)
        dc = np.diff(self.cols)
        return bool(np.all((dr > 0) | ((dr == 0) & (dc > 0))))


def canonicalize_coo(m):
    """Sort entries by (row, col) and sum duplicate coordinates.

    Explicit zeros are retained: they occupy storage and traffic like any
    other stored entry.
    """
    if m.is_canonical():
        return m
    order = np.lexsort((m.cols, m.rows))
    rows = m.rows[order]
    cols = m.cols[order]
    vals = m.vals[order]
    if len(rows) > 1:
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if dup.any():
            starts = np.flatnonzero(np.concatenate(([True], ~dup)))
            vals = np.add.reduceat(vals, starts)
            rows = rows[starts]
            cols = cols[starts]
    return COOMatrix(m.n_rows, m.n_cols, rows, cols, vals)


@dataclass
class CRSMatrix:
    """Row-pointer compressed sparse matrix; the reference kernel format.

    rpt[i]..rpt[i+1] delimits row i inside col/val; column indices are
    strictly increasing within each row.
    """

    n_rows: int
    n_cols: int
    rpt: np.ndarray
    col: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        _check_dims(self.n_rows, self.n_cols)
        self.rpt = np.ascontiguousarray(self.rpt, dtype=OFFSET_DTYPE)
        self.col = np.ascontiguousarray(self.col, dtype=INDEX_DTYPE)
        self.val = np.ascontiguousarray(self.val, dtype=VALUE_DTYPE)
        if len(self.rpt) != self.n_rows + 1:
            raise StructuralError(
                f"rpt has length {len(self.rpt)}, expected n_rows+1 = {self.n_rows + 1}"
            )
        if self.n_rows and self.rpt[0] != 0:
            raise StructuralError("rpt[0] must be 0")
        if len(self.rpt) and self.rpt[-1] != len(self.col):
            raise StructuralError("rpt[-1] must equal the number of stored entries")
        if len(self.col) != len(self.val):
            raise StructuralError("col and val must have equal length")
        d = np.diff(self.rpt)
        if len(d) and d.min() < 0:
            raise StructuralError("rpt must be non-decreasing")
        nnz = len(self.col)
        if nnz:
            if self.col.min() < 0 or self.col.max() >= self.n_cols:
                raise StructuralError("column index out of bounds")
            if nnz > 1:
                inc = np.diff(self.col.astype(np.int64)) > 0
                row_starts = self.rpt[1:-1] - 1
                row_starts = row_starts[(row_starts >= 0) & (row_starts < nnz - 1)]
                inc[row_starts] = True
                if not inc.all():
                    raise StructuralError(
                        "column indices must be strictly increasing within each row"
                    )

    @property
    def nnz(self):
        return len(self.val)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def row_lengths(self):
        return np.diff(self.rpt)


def coo_to_crs(m):
    """Convert (canonicalizing first if needed) triplet form to CRS."""
    m = canonicalize_coo(m)
    counts = np.bincount(m.rows, minlength=m.n_rows)
    rpt = np.zeros(m.n_rows + 1, dtype=OFFSET_DTYPE)
    np.cumsum(counts, out=rpt[1:])
    return CRSMatrix(m.n_rows, m.n_cols, rpt, m.cols.astype(INDEX_DTYPE), m.vals)


def crs_to_coo(m):
    rows = np.repeat(np.arange(m.n_rows, dtype=OFFSET_DTYPE), m.row_lengths())
    return COOMatrix(m.n_rows, m.n_cols, rows, m.col.astype(OFFSET_DTYPE), m.val.copy())


@dataclass
class SellMatrix:
    """Chunked sparse matrix: rows grouped into chunks of C, each chunk padded
    to its longest row and stored column-major.

    Within every sigma-aligned scope, stored rows are ordered by non-increasing
    length (ties by original index).  Element (stored row r, slot j) lives at
    flat position cs[r // C] + j*C + (r % C).  Padding slots hold value 0.0 and
    column index 0.  Stored rows [0, n_rows) are real; [n_rows, n_rows_padded)
    are padding rows of length 0.
    """

    n_rows: int
    n_cols: int
    C: int
    sigma: int
    n_rows_padded: int
    n_chunks: int
    cs: np.ndarray
    cl: np.ndarray
    col: np.ndarray
    val: np.ndarray
    perm: np.ndarray
    row_lengths: np.ndarray
    col_permuted: bool = False
    _inv_perm: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _check_dims(self.n_rows, self.n_cols)
        self.cs = np.ascontiguousarray(self.cs, dtype=OFFSET_DTYPE)
        self.cl = np.ascontiguousarray(self.cl, dtype=INDEX_DTYPE)
        self.col = np.ascontiguousarray(self.col, dtype=INDEX_DTYPE)
        self.val = np.ascontiguousarray(self.val, dtype=VALUE_DTYPE)
        self.perm = np.ascontiguousarray(self.perm, dtype=INDEX_DTYPE)
        self.row_lengths = np.ascontiguousarray(self.row_lengths, dtype=INDEX_DTYPE)
        if self.C < 1:
            raise ParameterError(f"chunk height C must be >= 1, got {self.C}")
        if self.sigma < 1:
            raise ParameterError(f"sigma must be >= 1, got {self.sigma}")
        if self.n_chunks * self.C != self.n_rows_padded:
            raise StructuralError("n_rows_padded must equal n_chunks * C")
        if not (self.n_rows <= self.n_rows_padded < self.n_rows + self.C):
            if not (self.n_rows == 0 and self.n_rows_padded == 0):
                raise StructuralError("n_rows_padded must be n_rows rounded up to C")
        if len(self.cs) != self.n_chunks + 1 or len(self.cl) != self.n_chunks:
            raise StructuralError("cs/cl length mismatch with n_chunks")
        if len(self.cs) and self.cs[0] != 0:
            raise StructuralError("cs[0] must be 0")
        if np.any(np.diff(self.cs) != self.C * self.cl.astype(OFFSET_DTYPE)):
            raise StructuralError("cs[i+1] - cs[i] must equal C * cl[i]")
        total = int(self.cs[-1]) if len(self.cs) else 0
        if len(self.col) != total or len(self.val) != total:
            raise StructuralError("col/val length must equal cs[n_chunks]")
        if len(self.perm) != self.n_rows:
            raise StructuralError("perm must have length n_rows")
        if self.n_rows and np.any(np.bincount(self.perm, minlength=self.n_rows) != 1):
            raise StructuralError("perm must be a permutation of 0..n_rows-1")
        if len(self.row_lengths) != self.n_rows_padded:
            raise StructuralError("row_lengths must have length n_rows_padded")
        if self.n_rows_padded:
            caps = np.repeat(self.cl, self.C)
            if np.any(self.row_lengths > caps) or np.any(self.row_lengths < 0):
                raise StructuralError("row length outside [0, cl] for its chunk")
            if np.any(self.row_lengths[self.n_rows:] != 0):
                raise StructuralError("padding rows must have length 0")
        if total and self.n_cols == 0:
            raise StructuralError("stored slots require n_cols >= 1")
        if total and (self.col.min() < 0 or self.col.max() >= self.n_cols):
            raise StructuralError("column index out of bounds")

    @property
    def nnz(self):
        return int(self.row_lengths.sum())

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def stored_slots(self):
        return int(self.cs[-1]) if len(self.cs) else 0

    @property
    def inv_perm(self):
        if self._inv_perm is None:
            inv = np.empty(self.n_rows, dtype=INDEX_DTYPE)
            inv[self.perm] = np.arange(self.n_rows, dtype=INDEX_DTYPE)
            self._inv_perm = inv
        return self._inv_perm


def chunk_occupancy(m):
    """Fraction of stored chunk slots holding actual matrix entries.

    Returns nnz / sum_i(C * cl[i]); 1.0 for an empty matrix (no slots wasted).
    """
    slots = m.stored_slots
    if slots == 0:
        return 1.0
    return m.nnz / slots


def _scope_order(lengths_padded, sigma_eff):
    """Stored-row order: within each sigma_eff-aligned scope sort by descending
    length, stable on the original index.  Returns order such that stored row p
    holds original (padded) row order[p]."""
    n = len(lengths_padded)
    idx = np.arange(n)
    scope = idx // sigma_eff
    return np.lexsort((idx, -lengths_padded, scope))


def crs_to_sell(m, C, sigma, align_bytes=1, permute_cols=False):
    """Build the chunked layout from CRS.

    Rows are sorted by non-increasing length inside each sigma-scope, the row
    count is padded up to a multiple of C, and each chunk is padded to its
    longest row.  sigma <= C is a no-op (identical to sigma=1); sigma >= n_rows
    means one global scope; any other sigma must be a multiple of C.

    With align_bytes=64, cl[i] is rounded up so each chunk's smaller index
    array (4 bytes per slot) stays 64-byte aligned; this lowers occupancy.
    With permute_cols (square matrices only), column indices are remapped into
    stored-row space so x can be used in permuted order without a gather
    through the permutation.
    """
    if C < 1:
        raise ParameterError(f"chunk height C must be >= 1, got {C}")
    if sigma < 1:
        raise ParameterError(f"sigma must be >= 1, got {sigma}")
    if align_bytes not in (1, 64):
        raise ParameterError(f"align_bytes must be 1 or 64, got {align_bytes}")
    if permute_cols and m.n_rows != m.n_cols:
        raise ParameterError(
            "column permutation requires a square matrix "
            f"(got {m.n_rows}x{m.n_cols}); rows and columns share one index space"
        )

    n = m.n_rows
    n_pad = ((n + C - 1) // C) * C if n else 0
    n_chunks = n_pad // C

    if sigma <= C or sigma >= n:
        sigma_eff = max(n_pad, 1)  # single global scope (or no-op below)
        if sigma <= C:
            sigma_eff = 1
    elif sigma % C != 0:
        raise ParameterError(
            f"sigma ({sigma}) must be a multiple of C ({C}) when C < sigma < n_rows"
        )
    else:
        sigma_eff = sigma

    lengths = m.row_lengths()
    lengths_pad = np.zeros(n_pad, dtype=OFFSET_DTYPE)
    lengths_pad[:n] = lengths

    if sigma_eff == 1:
        order = np.arange(n_pad)
        perm = np.arange(n, dtype=INDEX_DTYPE)
        sorted_len = lengths_pad
    else:
        order = _scope_order(lengths_pad, sigma_eff)
        perm_full = np.empty(n_pad, dtype=OFFSET_DTYPE)
        perm_full[order] = np.arange(n_pad)
        perm = perm_full[:n].astype(INDEX_DTYPE)
        sorted_len = lengths_pad[order]

    cl = sorted_len.reshape(n_chunks, C).max(axis=1) if n_chunks else sorted_len[:0]
    if align_bytes > 1:
        # round cl up until C*cl*4 is a multiple of align_bytes
        unit = align_bytes // math.gcd(4 * C, align_bytes)
        if unit > 1:
            cl = ((cl + unit - 1) // unit) * unit

    cs = np.zeros(n_chunks + 1, dtype=OFFSET_DTYPE)
    np.cumsum(C * cl, out=cs[1:])
    total = int(cs[-1])

    val = np.zeros(total, dtype=VALUE_DTYPE)
    col = np.zeros(total, dtype=INDEX_DTYPE)

    total_nnz = int(sorted_len.sum())
    if total_nnz:
        p_rep = np.repeat(np.arange(n_pad), sorted_len)
        starts = np.concatenate(([0], np.cumsum(sorted_len)[:-1]))
        j_rep = np.arange(total_nnz) - np.repeat(starts, sorted_len)
        dest = cs[p_rep // C] + j_rep * C + (p_rep % C)
        rpt_sorted = np.where(order < n, m.rpt[np.minimum(order, n - 1)], 0)
        src = np.repeat(rpt_sorted, sorted_len) + j_rep
        val[dest] = m.val[src]
        if permute_cols:
            col[dest] = perm[m.col[src]]
        else:
            col[dest] = m.col[src]

    return SellMatrix(
        n_rows=n,
        n_cols=m.n_cols,
        C=C,
        sigma=sigma,
        n_rows_padded=n_pad,
        n_chunks=n_chunks,
        cs=cs,
        cl=cl.astype(INDEX_DTYPE),
        col=col,
        val=val,
        perm=perm,
        row_lengths=sorted_len.astype(INDEX_DTYPE),
        col_permuted=bool(permute_cols),
    )


def sell_to_ellpack(m):
    """Single-chunk layout padding every row to the global maximum length
    (the C = n_rows special case of the chunked format)."""
    return crs_to_sell(m, C=max(m.n_rows, 1), sigma=1)


def sell_to_crs(m):
    """Recover the CRS form: trim padding, undo row (and column) permutation."""
    lens = m.row_lengths[m.perm].astype(OFFSET_DTYPE) if m.n_rows else \
        np.zeros(0, dtype=OFFSET_DTYPE)
    nnz = int(lens.sum())
    rows = np.repeat(np.arange(m.n_rows, dtype=OFFSET_DTYPE), lens)
    if nnz:
        p_rep = np.repeat(m.perm.astype(OFFSET_DTYPE), lens)
        starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
        j_rep = np.arange(nnz) - np.repeat(starts, lens)
        src = m.cs[p_rep // m.C] + j_rep * m.C + (p_rep % m.C)
        cols = m.col[src].astype(OFFSET_DTYPE)
        vals = m.val[src]
        if m.col_permuted:
            cols = m.inv_perm[cols].astype(OFFSET_DTYPE)
    else:
        cols = np.zeros(0, dtype=OFFSET_DTYPE)
        vals = np.zeros(0, dtype=VALUE_DTYPE)
    return coo_to_crs(COOMatrix(m.n_rows, m.n_cols, rows, cols, vals))


def permute_vector(v, perm):
    """Scatter v from original into stored order: out[perm[i]] = v[i]."""
    v = np.asarray(v, dtype=VALUE_DTYPE)
    if len(v) != len(perm):
        raise DimensionError(f"vector length {len(v)} != permutation length {len(perm)}")
    out = np.empty_like(v)
    out[perm] = v
    return out


def unpermute_vector(v, perm):
    """Gather v from stored back into original order: out[i] = v[perm[i]].

    v may be longer than perm (padded rows are dropped).
    """
    v = np.asarray(v, dtype=VALUE_DTYPE)
    if len(v) < len(perm):
        raise DimensionError(f"vector length {len(v)} < permutation length {len(perm)}")
    return v[perm]
