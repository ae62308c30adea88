"""Sparse matrix storage formats and SpMV performance engineering toolkit.

Provides CRS, COO, ELLPACK, and chunked sorted-row (SELL-C-sigma) storage,
multiplication kernels with a compiled core and a pure NumPy fallback,
analytic code-balance / roofline models, a cache simulator for right-hand
side reuse, memory bandwidth microbenchmarks, and Matrix Market plus binary
cache file I/O.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME, HAS_COMPILED, get_kernels
from .bench import SpmvRun, bench_spmv, choose_scheduling
from .cachesim import simulate_rhs_traffic
from .errors import (DimensionError, FormatError, ParameterError,
                     ResourceError, SellkitError, StructuralError)
from .formats import (COOMatrix, CRSMatrix, SellMatrix, canonicalize_coo,
                      chunk_occupancy, coo_to_crs, crs_to_coo, crs_to_sell,
                      permute_vector, sell_to_crs, sell_to_ellpack,
                      unpermute_vector)
from .generate import gen_banded, gen_dense, gen_skewed, gen_worst_case
from .io import (read_matrix_market, read_sell_cache, write_matrix_market,
                 write_sell_cache)
from .membench import (MemBenchResult, detect_llc_bytes, microbench_copy,
                       microbench_read_sum)
from .model import (AlphaEstimate, ModelParams, ModelResult,
                    code_balance_crs, code_balance_sell, infer_alpha,
                    roofline, roofline_ideal_alpha, roofline_upper_bound)
from .spmv import spmv_crs, spmv_crs_unrolled, spmv_sell
from .stats import MatrixStats, compute_stats

__all__ = [
    "__version__",
    "BACKEND_NAME", "HAS_COMPILED", "get_kernels",
    "SpmvRun", "bench_spmv", "choose_scheduling",
    "simulate_rhs_traffic",
    "DimensionError", "FormatError", "ParameterError", "ResourceError",
    "SellkitError", "StructuralError",
    "COOMatrix", "CRSMatrix", "SellMatrix", "canonicalize_coo",
    "chunk_occupancy", "coo_to_crs", "crs_to_coo", "crs_to_sell",
    "permute_vector", "sell_to_crs", "sell_to_ellpack", "unpermute_vector",
    "gen_banded", "gen_dense", "gen_skewed", "gen_worst_case",
    "read_matrix_market", "read_sell_cache", "write_matrix_market",
    "write_sell_cache",
    "MemBenchResult", "detect_llc_bytes", "microbench_copy",
    "microbench_read_sum",
    "AlphaEstimate", "ModelParams", "ModelResult", "code_balance_crs",
    "code_balance_sell", "infer_alpha", "roofline", "roofline_ideal_alpha",
    "roofline_upper_bound",
    "spmv_crs", "spmv_crs_unrolled", "spmv_sell",
    "MatrixStats", "compute_stats",
]
