"""Shared fixtures and oracles for the test suite."""

import numpy as np
import pytest

from sellkit import HAS_COMPILED, canonicalize_coo, coo_to_crs, get_kernels
from sellkit.formats import COOMatrix


def random_coo(rng, n_rows, n_cols, nnz_target, allow_zero_values=False):
    """A canonical random matrix with roughly nnz_target entries."""
    nnz_target = min(nnz_target, n_rows * n_cols)
    if nnz_target <= 0 or n_rows == 0 or n_cols == 0:
        return COOMatrix(n_rows, n_cols,
                         np.empty(0, np.int32), np.empty(0, np.int32),
                         np.empty(0, np.float64))
    flat = rng.choice(n_rows * n_cols, size=nnz_target, replace=False)
    rows = (flat // n_cols).astype(np.int32)
    cols = (flat % n_cols).astype(np.int32)
    vals = rng.uniform(-1.0, 1.0, size=nnz_target)
    if allow_zero_values:
        vals[rng.random(nnz_target) < 0.05] = 0.0
    return canonicalize_coo(COOMatrix(n_rows, n_cols, rows, cols, vals))


def random_crs(rng, n_rows, n_cols, nnz_target, **kw):
    return coo_to_crs(random_coo(rng, n_rows, n_cols, nnz_target, **kw))


def dense_of(crs):
    d = np.zeros((crs.n_rows, crs.n_cols))
    for i in range(crs.n_rows):
        for k in range(crs.rpt[i], crs.rpt[i + 1]):
            d[i, crs.col[k]] += crs.val[k]
    return d


BACKENDS = ["python"] + (["compiled"] if HAS_COMPILED else [])


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return get_kernels(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


class _AcceptancePlugin:
    def __init__(self):
        self.results = {}

    def pytest_runtest_logreport(self, report):
        if "test_acceptance" not in report.nodeid:
            return
        if report.when == "call" or (report.when == "setup" and report.skipped):
            name = report.nodeid.split("::", 1)[1]
            outcome = report.outcome.upper()
            if hasattr(report, "wasxfail") and report.outcome == "skipped":
                outcome = "XFAIL (expected)"
            prev = self.results.get(name)
            if prev != "FAILED":
                self.results[name] = outcome

    def pytest_terminal_summary(self, terminalreporter):
        if not self.results:
            return
        terminalreporter.write_sep("=", "acceptance summary")
        for name in sorted(self.results):
            status = self.results[name]
            status = {"PASSED": "PASS", "FAILED": "FAIL",
                      "SKIPPED": "SKIP"}.get(status, status)
            terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")


def pytest_configure(config):
    config.pluginmanager.register(_AcceptancePlugin(), "acceptance-summary")
