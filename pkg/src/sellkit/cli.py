"""Command-line front end: conversion, analysis, modeling, sigma sweeps, and
benchmarking, emitting reproducible reports as table, CSV, or JSON.

Matrices are given as .mtx / .mtx.gz files, .sell cache files, or inline
generator specs of the form gen:name:key=value,key=value (for example
gen:worst_case:n_chunks=8,C=4 or gen:banded:n=20000,half_bw=25).
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bench import bench_spmv, choose_scheduling
from .cachesim import simulate_rhs_traffic
from .errors import ParameterError, SellkitError
from .formats import (chunk_occupancy, coo_to_crs, crs_to_sell, sell_to_crs)
from .generate import gen_banded, gen_dense, gen_skewed, gen_worst_case
from .io import (read_matrix_market, read_sell_cache, write_matrix_market,
                 write_sell_cache)
from .membench import detect_llc_bytes, microbench_copy, microbench_read_sum
from .model import (ModelParams, infer_alpha, roofline,
                    roofline_upper_bound)
from .stats import compute_stats

REPORT_VERSION = 1

PRESET_CHUNK_HEIGHT = {"avx": 4, "mic": 16, "gpu-warp": 32, "unified": 32}

_X_SEED = 12345


@dataclass
class Report:
    command: str
    inputs: dict
    rows: list

    def render(self, fmt):
        if fmt == "json":
            return json.dumps(
                {"report_version": REPORT_VERSION, "command": self.command,
                 "inputs": self.inputs, "rows": self.rows},
                indent=2, sort_keys=False)
        if fmt == "csv":
            return self._render_csv()
        return self._render_table()

    def _header(self):
        keys = []
        for row in self.rows:
            for key in row:
                if key not in keys:
                    keys.append(key)
        return keys

    def _render_csv(self):
        lines = [f"# sellkit report v{REPORT_VERSION} command={self.command}"]
        keys = self._header()
        lines.append(",".join(keys))
        for row in self.rows:
            lines.append(",".join(_fmt_csv(row.get(k, "")) for k in keys))
        return "\n".join(lines)

    def _render_table(self):
        lines = [f"command: {self.command}"]
        for key, value in self.inputs.items():
            lines.append(f"  {key}: {value}")
        if not self.rows:
            return "\n".join(lines)
        keys = self._header()
        cells = [[_fmt_table(row.get(k, "")) for k in keys] for row in self.rows]
        widths = [max(len(k), *(len(c[i]) for c in cells))
                  for i, k in enumerate(keys)]
        lines.append("  ".join(k.ljust(w) for k, w in zip(keys, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for c in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)))
        return "\n".join(lines)


def _fmt_table(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _fmt_csv(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    s = str(v)
    if "," in s or '"' in s:
        s = '"' + s.replace('"', '""') + '"'
    return s


def _py(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


_GENERATORS = {
    "worst_case": (gen_worst_case, ("n_chunks", "C", "seed")),
    "dense": (gen_dense, ("n", "seed")),
    "banded": (gen_banded, ("n", "half_bw", "fill", "seed")),
    "skewed": (gen_skewed, ("n", "base_len", "spike_len", "spike_count", "seed")),
}


def _generate_from_spec(spec):
    parts = spec.split(":", 2)
    if len(parts) < 2:
        raise ParameterError(f"malformed generator spec: {spec!r}")
    name = parts[1].replace("-", "_")
    if name not in _GENERATORS:
        raise ParameterError(
            f"unknown generator {name!r}; choose from {sorted(_GENERATORS)}"
        )
    fn, allowed = _GENERATORS[name]
    kwargs = {}
    if len(parts) == 3 and parts[2]:
        for item in parts[2].split(","):
            if "=" not in item:
                raise ParameterError(f"malformed generator argument {item!r}")
            key, value = item.split("=", 1)
            key = key.strip()
            if key not in allowed:
                raise ParameterError(
                    f"generator {name!r} takes {allowed}, not {key!r}"
                )
            kwargs[key] = float(value) if "." in value else int(value)
    return fn(**kwargs)


def _load_matrix(spec):
    """Returns (crs, sell_or_None, source_kind)."""
    if spec.startswith("gen:"):
        return coo_to_crs(_generate_from_spec(spec)), None, "generated"
    if spec.endswith(".sell"):
        sell = read_sell_cache(spec)
        return sell_to_crs(sell), sell, "cache"
    return coo_to_crs(read_matrix_market(spec)), None, "matrix-market"


def _default_threads():
    env = os.environ.get("SELLKIT_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ParameterError(
                f"SELLKIT_THREADS must be an integer, got {env!r}"
            ) from exc
        if n < 1:
            raise ParameterError(f"SELLKIT_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _resolve_chunk_height(args):
    if args.C is not None:
        return args.C
    return PRESET_CHUNK_HEIGHT[args.preset]


def _x_vector(n_cols):
    return np.random.default_rng(_X_SEED).uniform(-1.0, 1.0, size=n_cols)


def _stats_row(st):
    return {
        "n_rows": st.n_rows, "n_cols": st.n_cols, "n_nz": st.n_nz,
        "n_nzr": st.n_nzr, "n_nzc": st.n_nzc, "density": st.density,
        "zeta": st.zeta, "footprint_bytes": st.footprint_bytes,
    }


def _emit(report, args):
    text = report.render(args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_analyze(args):
    crs, sell, kind = _load_matrix(args.matrix)
    st = compute_stats(crs)
    base = _stats_row(st)
    rows = []
    if kind == "cache":
        rows.append({**base, "C": sell.C, "sigma": sell.sigma,
                     "beta": chunk_occupancy(sell), "source": "cache"})
    else:
        C = _resolve_chunk_height(args)
        for sigma in args.sigmas:
            sm = crs_to_sell(crs, C, sigma)
            rows.append({**base, "C": C, "sigma": sigma,
                         "beta": chunk_occupancy(sm)})
    return Report("analyze", {"matrix": args.matrix}, rows)


def cmd_convert(args):
    crs, _, _ = _load_matrix(args.matrix)
    C = _resolve_chunk_height(args)
    t0 = time.perf_counter()
    sm = crs_to_sell(crs, C, args.sigma, align_bytes=args.align_bytes,
                     permute_cols=args.permute_cols)
    build_s = time.perf_counter() - t0
    write_sell_cache(sm, args.out_cache)
    note = "CRS-equivalent" if C == 1 and args.sigma == 1 else ""
    rows = [{
        "C": C, "sigma": args.sigma, "beta": chunk_occupancy(sm),
        "padding_bytes": 12 * (sm.stored_slots - sm.nnz),
        "build_s": build_s, "out": args.out_cache, "note": note,
    }]
    return Report("convert", {"matrix": args.matrix}, rows)


def _sell_effective_nnzr(sm):
    # the kernel writes every stored row, padded ones included
    return sm.nnz / sm.n_rows_padded if sm.n_rows_padded else 0.0


def cmd_bench(args):
    crs, cached, _ = _load_matrix(args.matrix)
    C = _resolve_chunk_height(args)
    st = compute_stats(crs)
    if args.sched == "auto":
        scheduling = choose_scheduling(st, detect_llc_bytes())
    else:
        scheduling = args.sched

    if args.kernel == "sell":
        if cached is not None and cached.C == C and cached.sigma == args.sigma:
            m = cached
        else:
            m = crs_to_sell(crs, C, args.sigma)
        beta = chunk_occupancy(m)
        run = bench_spmv(m, _x_vector(crs.n_cols), args.reps,
                         scheduling=scheduling, threads=args.threads,
                         trials=args.trials)
    else:
        m = crs
        beta = 1.0
        run = bench_spmv(m, _x_vector(crs.n_cols), args.reps,
                         scheduling=scheduling, threads=args.threads,
                         trials=args.trials,
                         unrolled=(args.kernel == "crs-unrolled"))

    row = {
        "kernel": args.kernel, "C": C if args.kernel == "sell" else 1,
        "sigma": args.sigma if args.kernel == "sell" else 1,
        "scheduling": run.scheduling, "threads": run.threads,
        "reps": run.repetitions, "backend": run.backend,
        "best_GF/s": run.gflops, "median_GF/s": run.gflops_median,
        "wall_s": run.wall_seconds, "checksum": run.checksum,
    }
    if args.bandwidth:
        bound = roofline_upper_bound(args.bandwidth, beta)
        row["beta"] = beta
        row["bound_GF/s"] = bound
        row["fraction_of_bound"] = run.gflops / bound if bound else 0.0
    return Report("bench", {"matrix": args.matrix}, [row])


def _sigma_ladder(C, sigma_min, sigma_max, n_rows):
    if sigma_min < 1 or sigma_max < sigma_min:
        raise ParameterError(
            f"need 1 <= sigma_min <= sigma_max, got {sigma_min}..{sigma_max}"
        )
    sigmas = [1] if sigma_min <= 1 else []
    s = C
    while s <= sigma_max:
        if s >= sigma_min and s > 1:
            sigmas.append(s)
        if s > 2 * n_rows:
            break
        s *= 2
    if not sigmas:
        raise ParameterError(
            f"no valid sigma in [{sigma_min}, {sigma_max}] for C={C}"
        )
    return sigmas


def cmd_sweep_sigma(args):
    crs, _, _ = _load_matrix(args.matrix)
    C = _resolve_chunk_height(args)
    sigma_max = args.sigma_max if args.sigma_max else max(crs.n_rows, 1)
    sigmas = _sigma_ladder(C, args.sigma_min, sigma_max, crs.n_rows)
    x = _x_vector(crs.n_cols)
    rows = []
    for sigma in sigmas:
        sm = crs_to_sell(crs, C, sigma)
        beta = chunk_occupancy(sm)
        v_meas = simulate_rhs_traffic(sm, args.cache_bytes, args.line_bytes)
        est = infer_alpha(v_meas, sm.nnz, beta, _sell_effective_nnzr(sm),
                          args.line_bytes)
        row = {"C": C, "sigma": sigma, "beta": beta,
               "alpha_sim": est.alpha, "alpha_in_range": est.in_range,
               "traffic_bytes": v_meas}
        if not args.no_bench:
            run = bench_spmv(sm, x, args.reps, scheduling="static",
                             threads=args.threads, trials=args.trials)
            row["best_GF/s"] = run.gflops
            row["median_GF/s"] = run.gflops_median
        rows.append(row)
    return Report("sweep-sigma",
                  {"matrix": args.matrix, "cache_bytes": args.cache_bytes,
                   "line_bytes": args.line_bytes}, rows)


def cmd_model(args):
    caveat = None
    if args.matrix:
        crs, _, _ = _load_matrix(args.matrix)
        C = _resolve_chunk_height(args)
        sm = crs_to_sell(crs, C, args.sigma)
        st = compute_stats(crs)
        beta = chunk_occupancy(sm)
        n_nzr = _sell_effective_nnzr(sm)
        n_nzc = st.n_nzc
        n_nz = sm.nnz
        if crs.n_rows != crs.n_cols:
            caveat = "balance model derived for square matrices"
    else:
        for name in ("beta", "nnzr", "nnzc"):
            if getattr(args, name) is None:
                raise ParameterError(f"--{name} is required without --matrix")
        sm = None
        beta, n_nzr, n_nzc, n_nz = args.beta, args.nnzr, args.nnzc, 0

    if args.alpha == "ideal":
        alpha = 1.0 / n_nzc
    elif args.alpha == "simulate":
        if sm is None:
            raise ParameterError("--alpha simulate requires --matrix")
        v = simulate_rhs_traffic(sm, args.cache_bytes, args.line_bytes)
        alpha = infer_alpha(v, n_nz, beta, n_nzr, args.line_bytes).alpha
    else:
        try:
            alpha = float(args.alpha)
        except ValueError as exc:
            raise ParameterError(
                f"--alpha must be a number, 'ideal' or 'simulate', got {args.alpha!r}"
            ) from exc

    params = ModelParams(alpha=alpha, beta=beta, n_nzr=n_nzr, n_nzc=n_nzc,
                         bandwidth_GBps=args.bandwidth)
    result = roofline(params, caveat=caveat)
    row = {
        "alpha": alpha, "beta": beta, "n_nzr": n_nzr, "n_nzc": n_nzc,
        "bandwidth_GB/s": args.bandwidth,
        "balance_bytes/flop": result.code_balance_bytes_per_flop,
        "predicted_GF/s": result.predicted_gflops,
        "bound_GF/s": roofline_upper_bound(args.bandwidth, beta),
    }
    if caveat:
        row["caveat"] = caveat
    return Report("model", {"alpha_mode": args.alpha}, [row])


def cmd_microbench(args):
    llc = detect_llc_bytes()
    if args.size_mb:
        size_bytes = int(args.size_mb * (1 << 20))
    else:
        size_bytes = 4 * llc
    n_elems = max(size_bytes // 8, 1)
    fn = microbench_copy if args.kind == "copy" else microbench_read_sum
    res = fn(n_elems, args.reps, threads=args.threads)
    rows = [{
        "kind": res.kind, "n_elems": res.n_elems, "reps": res.reps,
        "threads": res.threads, "seconds_s": res.seconds,
        "bandwidth_GB/s": res.gbps, "bandwidth_raw_GB/s": res.gbps_raw,
        "llc_bytes": llc,
    }]
    return Report("microbench", {"kind": args.kind}, rows)


def cmd_generate(args):
    coo = _generate_from_spec(args.spec)
    write_matrix_market(coo, args.out_mtx, comment=f" {args.spec}")
    rows = [{"spec": args.spec, "n_rows": coo.n_rows, "n_cols": coo.n_cols,
             "n_nz": coo.nnz, "out": args.out_mtx}]
    return Report("generate", {"spec": args.spec}, rows)


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from exc


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sellkit",
        description="Sparse matrix storage formats and SpMV performance toolkit",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"),
                        default="table", help="report rendering")
    common.add_argument("--out", default=None, help="write the report to a file")

    layout = argparse.ArgumentParser(add_help=False)
    layout.add_argument("-C", type=int, default=None, metavar="ROWS",
                        help="chunk height (overrides --preset)")
    layout.add_argument("--preset", choices=sorted(PRESET_CHUNK_HEIGHT),
                        default="unified",
                        help="chunk-height preset (default: unified, C=32)")

    threaded = argparse.ArgumentParser(add_help=False)
    threaded.add_argument("--threads", type=int, default=None,
                          help="worker count (default: SELLKIT_THREADS or cores)")

    p = sub.add_parser("analyze", parents=[common, layout],
                       help="matrix statistics and chunk occupancy per sigma")
    p.add_argument("matrix")
    p.add_argument("--sigmas", type=_int_list, default=[1],
                   help="comma-separated sorting scopes (default: 1)")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("convert", parents=[common, layout],
                       help="build a chunked matrix and write a binary cache")
    p.add_argument("matrix")
    p.add_argument("--sigma", type=int, default=1)
    p.add_argument("--align-bytes", type=int, choices=(1, 64), default=1)
    p.add_argument("--permute-cols", action="store_true")
    p.add_argument("-o", "--out-cache", required=True)
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("bench", parents=[common, layout, threaded],
                       help="time a multiplication kernel")
    p.add_argument("matrix")
    p.add_argument("--kernel", choices=("crs", "crs-unrolled", "sell"),
                   default="sell")
    p.add_argument("--sigma", type=int, default=1)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--sched", choices=("auto", "static", "guided1"),
                   default="auto")
    p.add_argument("--bandwidth", type=float, default=None, metavar="GBPS",
                   help="roofline bandwidth in GB/s for the bound comparison")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("sweep-sigma", parents=[common, layout, threaded],
                       help="occupancy, simulated alpha, and GF/s across sigma")
    p.add_argument("matrix")
    p.add_argument("--sigma-min", type=int, default=1)
    p.add_argument("--sigma-max", type=int, default=None,
                   help="default: number of rows")
    p.add_argument("--cache-bytes", type=int, default=1 << 20)
    p.add_argument("--line-bytes", type=int, default=64)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--no-bench", action="store_true",
                   help="skip timing, report only beta and simulated alpha")
    p.set_defaults(fn=cmd_sweep_sigma)

    p = sub.add_parser("model", parents=[common, layout],
                       help="code balance and roofline prediction")
    p.add_argument("--alpha", default="ideal",
                   help="number, 'ideal' (1/n_nzc), or 'simulate'")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--nnzr", type=float, default=None)
    p.add_argument("--nnzc", type=float, default=None)
    p.add_argument("--bandwidth", type=float, required=True, metavar="GBPS")
    p.add_argument("--matrix", default=None,
                   help="derive beta/nnzr/nnzc from a matrix instead")
    p.add_argument("--sigma", type=int, default=1)
    p.add_argument("--cache-bytes", type=int, default=1 << 20)
    p.add_argument("--line-bytes", type=int, default=64)
    p.set_defaults(fn=cmd_model)

    p = sub.add_parser("microbench", parents=[common, threaded],
                       help="copy / read main-memory bandwidth")
    p.add_argument("kind", choices=("copy", "read"))
    p.add_argument("--size-mb", type=float, default=None,
                   help="array size in MiB (default: 4x the detected LLC)")
    p.add_argument("--reps", type=int, default=10)
    p.set_defaults(fn=cmd_microbench)

    p = sub.add_parser("generate", parents=[common],
                       help="write a synthetic matrix as a Matrix Market file")
    p.add_argument("spec", help="generator spec, e.g. gen:worst_case:n_chunks=8,C=4")
    p.add_argument("-o", "--out-mtx", required=True)
    p.set_defaults(fn=cmd_generate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "threads", None) is None and hasattr(args, "threads"):
            args.threads = _default_threads()
        report = args.fn(args)
        rows = [{k: _py(v) for k, v in row.items()} for row in report.rows]
        report = Report(report.command, report.inputs, rows)
        _emit(report, args)
    except SellkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
