"""Matrix Market ingestion and the binary cache for chunked matrices.

The text parser streams in batches (files with 100M+ entries must not be
materialized as text) but still reports exact line numbers on errors by
re-scanning the file on the failure path only.
"""

import gzip
import os
import struct
import warnings
import zlib

import numpy as np

from .errors import FormatError
from .formats import COOMatrix, SellMatrix, canonicalize_coo

_BATCH_ROWS = 1 << 20

_CACHE_MAGIC = b"SELL"
_CACHE_VERSION = 1
_FLAG_COL_PERMUTED = 1


def _open_text(path, mode="rt"):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode.rstrip("t") or "r")


def _locate_data_line(path, index):
    """Line number of the index-th non-comment, non-blank line (0 = size line)."""
    seen = -1  # the banner is itself a %-line and gets skipped
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if lineno == 1:
                continue
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            seen += 1
            if seen == index:
                return lineno
    return None


def _first_malformed_line(path, n_tokens):
    """Find the first body line that fails tokenization, for error reporting."""
    seen = -1
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if lineno == 1:
                continue
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            seen += 1
            if seen == 0:
                continue  # size line
            tokens = s.split()
            if len(tokens) != n_tokens:
                return lineno, f"expected {n_tokens} values, found {len(tokens)}"
            try:
                for t in tokens:
                    float(t)
            except ValueError:
                return lineno, f"unparseable value in {s!r}"
    return None, "malformed entry"


def _count_lines(path):
    with _open_text(path) as fh:
        return sum(1 for _ in fh)


def _parse_banner(path, banner):
    if not banner or not banner.lstrip().lower().startswith("%%matrixmarket"):
        raise FormatError(f"{path}:1: missing %%MatrixMarket banner")
    tokens = banner.lower().split()
    if len(tokens) < 5:
        raise FormatError(f"{path}:1: banner must name object, format, field, symmetry")
    obj, fmt, field, symmetry = tokens[1:5]
    if obj != "matrix":
        raise FormatError(f"{path}:1: unsupported object {obj!r} (only 'matrix')")
    if fmt not in ("coordinate", "array"):
        raise FormatError(f"{path}:1: unsupported format {fmt!r}")
    if field in ("complex",):
        raise FormatError(f"{path}:1: complex matrices are not supported")
    if field not in ("real", "integer", "pattern"):
        raise FormatError(f"{path}:1: unsupported field {field!r}")
    if symmetry == "hermitian":
        raise FormatError(f"{path}:1: hermitian matrices are not supported")
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise FormatError(f"{path}:1: unsupported symmetry {symmetry!r}")
    if fmt == "array" and field == "pattern":
        raise FormatError(f"{path}:1: pattern field is invalid with array format")
    return fmt, field, symmetry


def _read_size_line(path, fh, n_fields):
    lineno = 1
    while True:
        line = fh.readline()
        if not line:
            raise FormatError(f"{path}: file ended before the size line")
        lineno += 1
        s = line.strip()
        if s and not s.startswith("%"):
            break
    parts = s.split()
    if len(parts) != n_fields or not all(p.isdigit() for p in parts):
        raise FormatError(
            f"{path}:{lineno}: malformed size line {s!r} "
            f"(expected {n_fields} non-negative integers)"
        )
    return [int(p) for p in parts]


def _read_body(path, fh, width, expected):
    blocks = []
    total = 0
    while True:
        try:
            with warnings.catch_warnings():
                # loadtxt warns when a batch hits end-of-file with no rows
                warnings.simplefilter("ignore", UserWarning)
                block = np.loadtxt(fh, dtype=np.float64, comments="%",
                                   max_rows=_BATCH_ROWS, ndmin=2)
        except ValueError as exc:
            lineno, why = _first_malformed_line(path, width)
            where = f":{lineno}" if lineno else ""
            raise FormatError(f"{path}{where}: {why}") from exc
        if block.size == 0:
            break
        if block.shape[1] != width:
            lineno, why = _first_malformed_line(path, width)
            where = f":{lineno}" if lineno else ""
            raise FormatError(f"{path}{where}: {why}")
        total += len(block)
        if total > expected:
            lineno = _locate_data_line(path, expected + 1)
            raise FormatError(
                f"{path}:{lineno}: more entries than the declared {expected}"
            )
        blocks.append(block)
    if total < expected:
        raise FormatError(
            f"{path}:{_count_lines(path)}: file ended after {total} of "
            f"{expected} declared entries"
        )
    if not blocks:
        return np.zeros((0, width))
    return np.concatenate(blocks, axis=0)


def _check_indices(path, idx, upper, axis):
    bad = (idx < 1) | (idx > upper) | (idx != np.floor(idx))
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        lineno = _locate_data_line(path, k + 1)
        raise FormatError(
            f"{path}:{lineno}: {axis} index {idx[k]:g} out of range 1..{upper}"
        )


def _expand_symmetry(rows, cols, vals, symmetry):
    if symmetry == "general":
        return rows, cols, vals
    off = rows != cols
    sign = -1.0 if symmetry == "skew-symmetric" else 1.0
    return (np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, sign * vals[off]]))


def _array_positions(n_rows, n_cols, symmetry, count):
    """Map flat column-major storage positions to (row, col) for array files."""
    k = np.arange(count, dtype=np.int64)
    if symmetry == "general":
        return k % n_rows, k // n_rows
    # triangular column-major storage: column j holds rows j.. (or j+1.. for skew)
    skip = 1 if symmetry == "skew-symmetric" else 0
    col_lens = n_rows - skip - np.arange(n_cols, dtype=np.int64)
    col_lens = np.maximum(col_lens, 0)
    starts = np.concatenate(([0], np.cumsum(col_lens)))
    cols = np.searchsorted(starts, k, side="right") - 1
    rows = cols + skip + (k - starts[cols])
    return rows, cols


def read_matrix_market(path):
    """Parse a Matrix Market file (.mtx or .mtx.gz) into canonical triplet form.

    Symmetric and skew-symmetric storage is expanded to general form, pattern
    entries get value 1.0, and 1-based indices become 0-based.
    """
    path = os.fspath(path)
    with _open_text(path) as fh:
        fmt, field, symmetry = _parse_banner(path, fh.readline())
        if fmt == "coordinate":
            n_rows, n_cols, nnz = _read_size_line(path, fh, 3)
            width = 2 if field == "pattern" else 3
            body = _read_body(path, fh, width, nnz)
            _check_indices(path, body[:, 0], n_rows, "row")
            _check_indices(path, body[:, 1], n_cols, "column")
            rows = body[:, 0].astype(np.int64) - 1
            cols = body[:, 1].astype(np.int64) - 1
            vals = body[:, 2].copy() if width == 3 else np.ones(len(body))
        else:
            n_rows, n_cols = _read_size_line(path, fh, 2)
            if symmetry != "general" and n_rows != n_cols:
                raise FormatError(
                    f"{path}: {symmetry} array storage requires a square matrix"
                )
            skip = 1 if symmetry == "skew-symmetric" else 0
            if symmetry == "general":
                expected = n_rows * n_cols
            else:
                d = n_rows - skip
                expected = d * (d + 1) // 2
            body = _read_body(path, fh, 1, expected)
            rows, cols = _array_positions(n_rows, n_cols, symmetry, expected)
            vals = body[:, 0].copy()
            # dense array storage lists every position; zeros are structural
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]

    if symmetry != "general":
        diag_bad = (symmetry == "skew-symmetric") and bool(np.any(rows == cols))
        if diag_bad:
            k = int(np.flatnonzero(rows == cols)[0])
            lineno = _locate_data_line(path, k + 1) if fmt == "coordinate" else None
            where = f":{lineno}" if lineno else ""
            raise FormatError(
                f"{path}{where}: skew-symmetric matrices cannot have diagonal entries"
            )
        rows, cols, vals = _expand_symmetry(rows, cols, vals, symmetry)

    return canonicalize_coo(COOMatrix(n_rows, n_cols, rows, cols, vals))


def write_matrix_market(m, path, comment=None):
    """Write triplet form as a general real coordinate Matrix Market file."""
    m = canonicalize_coo(m)
    path = os.fspath(path)
    with _open_text(path, "wt") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            fh.write(f"%{comment}\n")
        fh.write(f"{m.n_rows} {m.n_cols} {m.nnz}\n")
        for start in range(0, m.nnz, _BATCH_ROWS):
            stop = min(start + _BATCH_ROWS, m.nnz)
            np.savetxt(
                fh,
                np.column_stack((m.rows[start:stop] + 1, m.cols[start:stop] + 1,
                                 m.vals[start:stop])),
                fmt="%d %d %.17g",
            )


class _CrcWriter:
    def __init__(self, fh):
        self.fh = fh
        self.crc = 0

    def write(self, data):
        self.fh.write(data)
        self.crc = zlib.crc32(data, self.crc)


class _CrcReader:
    def __init__(self, fh, path):
        self.fh = fh
        self.path = path
        self.crc = 0

    def read_exact(self, n):
        data = self.fh.read(n)
        if len(data) != n:
            raise FormatError(f"{self.path}: truncated file")
        self.crc = zlib.crc32(data, self.crc)
        return data


def write_sell_cache(m, path):
    """Write a chunked matrix in the binary cache layout.

    Little-endian: magic "SELL", version u16, flags u16 (bit 0: columns
    permuted), six u64 dimensions, then length-prefixed arrays cs (u64),
    cl (u32), col (u32), val (f64), perm (u32), and a trailing CRC-32 of
    everything before it.
    """
    path = os.fspath(path)
    flags = _FLAG_COL_PERMUTED if m.col_permuted else 0
    with open(path, "wb") as fh:
        w = _CrcWriter(fh)
        w.write(struct.pack("<4sHH", _CACHE_MAGIC, _CACHE_VERSION, flags))
        w.write(struct.pack("<6Q", m.n_rows, m.n_cols, m.C, m.sigma,
                            m.n_rows_padded, m.n_chunks))
        for arr, dtype in ((m.cs, "<u8"), (m.cl, "<u4"), (m.col, "<u4"),
                           (m.val, "<f8"), (m.perm, "<u4")):
            w.write(struct.pack("<Q", len(arr)))
            w.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())
        fh.write(struct.pack("<I", w.crc))


def _reconstruct_row_lengths(n_rows_padded, n_chunks, C, cs, cl, col, val):
    # padding slots are identified by value 0.0 and column 0; a row's length is
    # its chunk length minus the trailing run of padding slots
    lengths = np.zeros(n_rows_padded, dtype=np.int32)
    for i in range(n_chunks):
        cl_i = int(cl[i])
        if cl_i == 0:
            continue
        start = int(cs[i])
        block_pad = (val[start:start + cl_i * C].reshape(cl_i, C) == 0.0)
        block_pad &= col[start:start + cl_i * C].reshape(cl_i, C) == 0
        run = np.logical_and.accumulate(block_pad[::-1], axis=0).sum(axis=0)
        lengths[i * C:(i + 1) * C] = cl_i - run
    return lengths


def read_sell_cache(path):
    """Read a binary cache file back into a chunked matrix, verifying its CRC."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        r = _CrcReader(fh, path)
        magic, version, flags = struct.unpack("<4sHH", r.read_exact(8))
        if magic != _CACHE_MAGIC:
            raise FormatError(f"{path}: not a chunked-matrix cache file")
        if version != _CACHE_VERSION:
            raise FormatError(
                f"{path}: cache version {version} not supported "
                f"(expected {_CACHE_VERSION})"
            )
        n_rows, n_cols, C, sigma, n_rows_padded, n_chunks = struct.unpack(
            "<6Q", r.read_exact(48))
        expected_lens = {
            "cs": n_chunks + 1, "cl": n_chunks, "col": None, "val": None,
            "perm": n_rows,
        }
        arrays = {}
        for name, dtype, out_dtype in (("cs", "<u8", np.int64),
                                       ("cl", "<u4", np.int32),
                                       ("col", "<u4", np.int32),
                                       ("val", "<f8", np.float64),
                                       ("perm", "<u4", np.int32)):
            (count,) = struct.unpack("<Q", r.read_exact(8))
            want = expected_lens[name]
            if want is not None and count != want:
                raise FormatError(
                    f"{path}: array {name} has {count} elements, expected {want}"
                )
            itemsize = np.dtype(dtype).itemsize
            data = r.read_exact(count * itemsize)
            arrays[name] = np.frombuffer(data, dtype=dtype).astype(out_dtype)
        crc_bytes = fh.read(4)
        if len(crc_bytes) != 4:
            raise FormatError(f"{path}: truncated file")
        (stored_crc,) = struct.unpack("<I", crc_bytes)
        if stored_crc != r.crc:
            raise FormatError(f"{path}: checksum failure (corrupted cache)")

    row_lengths = _reconstruct_row_lengths(
        n_rows_padded, n_chunks, C, arrays["cs"], arrays["cl"],
        arrays["col"], arrays["val"])
    return SellMatrix(
        n_rows=int(n_rows),
        n_cols=int(n_cols),
        C=int(C),
        sigma=int(sigma),
        n_rows_padded=int(n_rows_padded),
        n_chunks=int(n_chunks),
        cs=arrays["cs"],
        cl=arrays["cl"],
        col=arrays["col"],
        val=arrays["val"],
        perm=arrays["perm"],
        row_lengths=row_lengths,
        col_permuted=bool(flags & _FLAG_COL_PERMUTED),
    )
