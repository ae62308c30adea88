"""Multiplication kernels: oracle checks, backend agreement, threading."""

import numpy as np
import pytest

from sellkit import (DimensionError, HAS_COMPILED, ParameterError,
                     coo_to_crs, crs_to_sell, get_kernels, permute_vector,
                     spmv_crs, spmv_crs_unrolled, spmv_sell,
                     unpermute_vector)
from sellkit.formats import COOMatrix
from conftest import dense_of, random_crs


def a_matrix(rng, n=60):
    return random_crs(rng, n, n, 6 * n)


class TestAgainstDenseOracle:
    @pytest.mark.parametrize("C,sigma", [(1, 1), (2, 2), (4, 16), (8, 64),
                                         (16, 16), (32, 10 ** 9)])
    def test_sell_matches_dense(self, rng, kernels, C, sigma):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        ref = dense_of(m) @ x
        s = crs_to_sell(m, C, sigma)
        y = unpermute_vector(spmv_sell(s, x, kernels=kernels), s.perm)
        np.testing.assert_allclose(y, ref, rtol=1e-12, atol=1e-13)

    def test_crs_matches_dense(self, rng, kernels):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        ref = dense_of(m) @ x
        np.testing.assert_allclose(spmv_crs(m, x, kernels=kernels), ref,
                                   rtol=1e-12, atol=1e-13)

    def test_unrolled_matches_dense(self, rng, kernels):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        ref = dense_of(m) @ x
        np.testing.assert_allclose(spmv_crs_unrolled(m, x, kernels=kernels),
                                   ref, rtol=1e-12, atol=1e-13)

    def test_rectangular(self, rng, kernels):
        m = random_crs(rng, 30, 70, 250)
        x = rng.uniform(-1, 1, 70)
        ref = dense_of(m) @ x
        np.testing.assert_allclose(spmv_crs(m, x, kernels=kernels), ref,
                                   rtol=1e-12, atol=1e-13)
        s = crs_to_sell(m, 8, 16)
        y = unpermute_vector(spmv_sell(s, x, kernels=kernels), s.perm)
        np.testing.assert_allclose(y, ref, rtol=1e-12, atol=1e-13)

    def test_column_permuted_layout(self, rng, kernels):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        ref = dense_of(m) @ x
        s = crs_to_sell(m, 4, m.n_rows, permute_cols=True)
        xp = permute_vector(x, s.perm)
        y = unpermute_vector(spmv_sell(s, xp, kernels=kernels), s.perm)
        np.testing.assert_allclose(y, ref, rtol=1e-12, atol=1e-13)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled core not built")
class TestBackendsAgreeBitwise:
    def test_crs(self, rng):
        m = a_matrix(rng, 90)
        x = rng.uniform(-1, 1, 90)
        yc = spmv_crs(m, x, kernels=get_kernels("compiled"))
        yp = spmv_crs(m, x, kernels=get_kernels("python"))
        np.testing.assert_array_equal(yc, yp)

    @pytest.mark.parametrize("C,sigma", [(1, 1), (4, 8), (16, 10 ** 9)])
    def test_sell(self, rng, C, sigma):
        m = a_matrix(rng, 90)
        s = crs_to_sell(m, C, sigma)
        x = rng.uniform(-1, 1, 90)
        yc = spmv_sell(s, x, kernels=get_kernels("compiled"))
        yp = spmv_sell(s, x, kernels=get_kernels("python"))
        np.testing.assert_array_equal(yc, yp)

    def test_accumulate(self, rng):
        m = a_matrix(rng, 70)
        x = rng.uniform(-1, 1, 70)
        y0 = rng.uniform(-1, 1, 70)
        yc = spmv_crs(m, x, y=y0.copy(), accumulate=True,
                      kernels=get_kernels("compiled"))
        yp = spmv_crs(m, x, y=y0.copy(), accumulate=True,
                      kernels=get_kernels("python"))
        np.testing.assert_array_equal(yc, yp)


class TestChunkOneIsRowStorage:
    def test_bitwise_same_as_crs(self, rng, kernels):
        m = a_matrix(rng, 81)
        s = crs_to_sell(m, 1, 1)
        x = rng.uniform(-1, 1, 81)
        np.testing.assert_array_equal(spmv_sell(s, x, kernels=kernels),
                                      spmv_crs(m, x, kernels=kernels))


class TestAccumulateAndOutput:
    def test_accumulate_adds_exactly_once(self, rng, kernels):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        y0 = rng.uniform(-1, 1, m.n_rows)
        base = spmv_crs(m, x, kernels=kernels)
        acc = spmv_crs(m, x, y=y0.copy(), accumulate=True, kernels=kernels)
        np.testing.assert_array_equal(acc, y0 + base)

    def test_overwrite_ignores_previous_contents(self, rng, kernels):
        m = a_matrix(rng)
        x = rng.uniform(-1, 1, m.n_cols)
        y = np.full(m.n_rows, 99.0)
        out = spmv_crs(m, x, y=y, kernels=kernels)
        assert out is y
        np.testing.assert_array_equal(out, spmv_crs(m, x, kernels=kernels))

    def test_sell_output_is_padded_length(self, rng, kernels):
        m = random_crs(rng, 10, 10, 40)
        s = crs_to_sell(m, 4, 1)
        y = spmv_sell(s, rng.uniform(size=10), kernels=kernels)
        assert y.shape == (12,)
        np.testing.assert_array_equal(y[10:], [0.0, 0.0])

    def test_empty_rows_give_zero(self, kernels):
        rows = np.array([0], np.int64)
        cols = np.array([2], np.int64)
        m = coo_to_crs(COOMatrix(4, 4, rows, cols, np.array([3.0])))
        y = spmv_crs(m, np.ones(4), kernels=kernels)
        np.testing.assert_array_equal(y, [3.0, 0, 0, 0])


class TestThreading:
    @pytest.mark.parametrize("scheduling", ["static", "guided1"])
    @pytest.mark.parametrize("threads", [2, 3, 8])
    def test_crs_bitwise_reproducible(self, rng, kernels, scheduling, threads):
        m = a_matrix(rng, 200)
        x = rng.uniform(-1, 1, 200)
        ref = spmv_crs(m, x, kernels=kernels)
        y = spmv_crs(m, x, threads=threads, scheduling=scheduling,
                     kernels=kernels)
        np.testing.assert_array_equal(y, ref)

    @pytest.mark.parametrize("scheduling", ["static", "guided1"])
    def test_sell_bitwise_reproducible(self, rng, kernels, scheduling):
        s = crs_to_sell(a_matrix(rng, 200), 8, 32)
        x = rng.uniform(-1, 1, 200)
        ref = spmv_sell(s, x, kernels=kernels)
        for threads in (2, 5):
            y = spmv_sell(s, x, threads=threads, scheduling=scheduling,
                          kernels=kernels)
            np.testing.assert_array_equal(y, ref)

    def test_more_threads_than_rows(self, rng, kernels):
        m = random_crs(rng, 3, 3, 6)
        x = rng.uniform(size=3)
        y = spmv_crs(m, x, threads=16, scheduling="guided1", kernels=kernels)
        np.testing.assert_array_equal(y, spmv_crs(m, x, kernels=kernels))

    def test_unknown_scheduling_rejected(self, rng):
        m = random_crs(rng, 5, 5, 10)
        with pytest.raises(ParameterError):
            spmv_crs(m, np.ones(5), threads=2, scheduling="dynamic")

    def test_thread_count_validated(self, rng):
        m = random_crs(rng, 5, 5, 10)
        with pytest.raises(ParameterError):
            spmv_crs(m, np.ones(5), threads=0)


class TestUnrolled:
    def test_row_lengths_around_multiples_of_four(self, kernels):
        # remainder handling: lengths 0..9 all present
        lengths = np.arange(10)
        rows = np.repeat(np.arange(10), lengths)
        cols = np.concatenate([np.arange(k) for k in lengths])
        m = coo_to_crs(COOMatrix(10, 10, rows, cols,
                                 np.arange(lengths.sum(), dtype=float) + 1))
        x = np.linspace(1, 2, 10)
        ref = dense_of(m) @ x
        y = spmv_crs_unrolled(m, x, kernels=kernels)
        np.testing.assert_allclose(y, ref, rtol=1e-13)

    def test_agrees_with_plain_within_rounding(self, rng, kernels):
        m = a_matrix(rng, 120)
        x = rng.uniform(-1, 1, 120)
        a = spmv_crs(m, x, kernels=kernels)
        b = spmv_crs_unrolled(m, x, kernels=kernels)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


class TestInputValidation:
    def test_x_length(self, rng, kernels):
        m = random_crs(rng, 5, 7, 20)
        with pytest.raises(DimensionError):
            spmv_crs(m, np.ones(6), kernels=kernels)

    def test_y_length(self, rng, kernels):
        m = random_crs(rng, 5, 7, 20)
        with pytest.raises(DimensionError):
            spmv_crs(m, np.ones(7), y=np.zeros(6), kernels=kernels)

    def test_sell_y_length_is_padded(self, rng, kernels):
        s = crs_to_sell(random_crs(rng, 5, 5, 15), 4, 1)
        with pytest.raises(DimensionError):
            spmv_sell(s, np.ones(5), y=np.zeros(5), kernels=kernels)

    def test_readonly_y_rejected(self, rng, kernels):
        m = random_crs(rng, 5, 5, 15)
        y = np.zeros(5)
        y.flags.writeable = False
        with pytest.raises(ParameterError):
            spmv_crs(m, np.ones(5), y=y, kernels=kernels)

    def test_list_x_accepted(self, rng, kernels):
        m = random_crs(rng, 4, 4, 10)
        y = spmv_crs(m, [1.0, 2.0, 3.0, 4.0], kernels=kernels)
        ref = spmv_crs(m, np.array([1.0, 2.0, 3.0, 4.0]), kernels=kernels)
        np.testing.assert_array_equal(y, ref)
