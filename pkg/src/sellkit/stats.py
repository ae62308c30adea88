"""Structural statistics that drive the performance models and heuristics."""

from dataclasses import dataclass

import numpy as np


@dataclass
class MatrixStats:
    """Row-structure summary of a sparse matrix.

    zeta is the coefficient of variation of the row lengths (population
    standard deviation divided by the mean); footprint_bytes is the full
    working set of one CRS multiply: 12 bytes per stored entry, a 4-byte
    row-pointer per row, and the two 8-byte vectors.
    """

    n_rows: int
    n_cols: int
    n_nz: int
    n_nzr: float
    n_nzc: float
    density: float
    row_lengths: np.ndarray
    zeta: float
    footprint_bytes: int


def compute_stats(m):
    lengths = m.row_lengths()
    n_nz = m.nnz
    n_rows, n_cols = m.n_rows, m.n_cols
    n_nzr = n_nz / n_rows if n_rows else 0.0
    n_nzc = n_nz / n_cols if n_cols else 0.0
    density = n_nz / (n_rows * n_cols) if n_rows and n_cols else 0.0
    if n_rows and n_nzr > 0:
        zeta = float(np.std(lengths) / n_nzr)
    else:
        zeta = 0.0
    footprint = 12 * n_nz + 4 * (n_rows + 1) + 8 * (n_rows + n_cols)
    return MatrixStats(
        n_rows=n_rows,
        n_cols=n_cols,
        n_nz=n_nz,
        n_nzr=n_nzr,
        n_nzc=n_nzc,
        density=density,
        row_lengths=lengths,
        zeta=zeta,
        footprint_bytes=footprint,
    )
