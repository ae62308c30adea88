"""Analytic roofline machinery: code balance and performance bounds for the
multiplication kernels, plus inversion of measured traffic into the RHS
reuse factor alpha.

All constants assume 8-byte values and 4-byte indices: 12 bytes of matrix
data per stored entry and a 16-byte load/store pair per result row.
"""

from dataclasses import dataclass

from .errors import ParameterError


@dataclass
class ModelParams:
    """Inputs of the bandwidth model: RHS traffic factor alpha (8*alpha bytes
    of x per stored entry), chunk occupancy beta, average nonzeros per row and
    column, and the attainable memory bandwidth in GB/s."""

    alpha: float
    beta: float
    n_nzr: float
    n_nzc: float
    bandwidth_GBps: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError(f"beta must be in (0, 1], got {self.beta}")
        if self.n_nzr <= 0:
            raise ParameterError(f"n_nzr must be positive, got {self.n_nzr}")
        if self.n_nzc <= 0:
            raise ParameterError(f"n_nzc must be positive, got {self.n_nzc}")
        if self.bandwidth_GBps <= 0:
            raise ParameterError(
                f"bandwidth_GBps must be positive, got {self.bandwidth_GBps}"
            )


@dataclass
class ModelResult:
    code_balance_bytes_per_flop: float
    predicted_gflops: float
    caveat: str = None


def code_balance_crs(alpha, n_nzr):
    """Memory traffic per flop of the row-pointer kernel: 6 + 4*alpha + 8/n_nzr."""
    if n_nzr <= 0:
        raise ParameterError(f"n_nzr must be positive, got {n_nzr}")
    if alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    return 6.0 + 4.0 * alpha + 8.0 / n_nzr


def code_balance_sell(alpha, beta, n_nzr):
    """Memory traffic per flop of the chunked kernel: 6/beta + 4*alpha + 8/n_nzr.

    Equals code_balance_crs when beta = 1.
    """
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must be in (0, 1], got {beta}")
    if n_nzr <= 0:
        raise ParameterError(f"n_nzr must be positive, got {n_nzr}")
    if alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    return 6.0 / beta + 4.0 * alpha + 8.0 / n_nzr


def roofline(params, balance=None, caveat=None):
    """Bandwidth-limited performance prediction: predicted GF/s = b / balance.

    When balance is omitted it is derived from the parameters via
    code_balance_sell (beta=1 gives the CRS case).
    """
    if balance is None:
        balance = code_balance_sell(params.alpha, params.beta, params.n_nzr)
    if balance <= 0:
        raise ParameterError(f"code balance must be positive, got {balance}")
    return ModelResult(
        code_balance_bytes_per_flop=balance,
        predicted_gflops=params.bandwidth_GBps / balance,
        caveat=caveat,
    )


def roofline_ideal_alpha(params, caveat=None):
    """Prediction in the ideal-reuse scenario alpha = 1/n_nzc (each RHS element
    loaded exactly once)."""
    ideal = ModelParams(
        alpha=1.0 / params.n_nzc,
        beta=params.beta,
        n_nzr=params.n_nzr,
        n_nzc=params.n_nzc,
        bandwidth_GBps=params.bandwidth_GBps,
    )
    return roofline(ideal, caveat=caveat)


def roofline_upper_bound(bandwidth_GBps, beta):
    """Best attainable performance level: b * beta / 6 GF/s (the matrix-data
    floor of the balance; alpha = 0 and very long rows)."""
    if bandwidth_GBps <= 0:
        raise ParameterError(
            f"bandwidth_GBps must be positive, got {bandwidth_GBps}"
        )
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must be in (0, 1], got {beta}")
    return bandwidth_GBps * beta / 6.0


@dataclass
class AlphaEstimate:
    """alpha inferred from measured traffic.  in_range is False when the value
    falls outside [0, L_C] (L_C = line_bytes/8, the every-access-misses limit),
    signalling a run that was not bandwidth-bound or noisy input."""

    alpha: float
    l_c: float
    in_range: bool


def infer_alpha(v_meas_bytes, n_nz, beta, n_nzr, line_bytes=64):
    """Solve the chunked code balance for alpha given measured traffic:

        alpha = (v_meas / (2*n_nz) - 6/beta - 8/n_nzr) / 4

    The value is returned as-is (possibly out of range) with a quality flag.
    Only meaningful for bandwidth-bound runs.
    """
    if n_nz <= 0:
        raise ParameterError(f"n_nz must be positive, got {n_nz}")
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must be in (0, 1], got {beta}")
    if n_nzr <= 0:
        raise ParameterError(f"n_nzr must be positive, got {n_nzr}")
    if line_bytes < 8:
        raise ParameterError(f"line_bytes must be >= 8, got {line_bytes}")
    alpha = (v_meas_bytes / (2.0 * n_nz) - 6.0 / beta - 8.0 / n_nzr) / 4.0
    l_c = line_bytes / 8.0
    return AlphaEstimate(alpha=alpha, l_c=l_c, in_range=bool(0.0 <= alpha <= l_c))
