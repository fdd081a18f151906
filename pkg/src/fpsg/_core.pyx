# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: flux operator, block tridiagonal LU, nonlocal drift.

Same call signatures and results as :mod:`fpsg._core_py`.
"""
import numpy as np
from libc.math cimport fabs
from scipy.linalg.cython_blas cimport dgemm, dgemv
from scipy.linalg.cython_lapack cimport dgetrf, dgetrs



def fp_apply(b, d, f, double dv):
    shape = np.broadcast(b, d, f).shape
    cdef const double[:, ::1] bb = np.ascontiguousarray(np.broadcast_to(b, shape), dtype=np.float64).reshape(-1, shape[len(shape) - 1])
    cdef const double[:, ::1] dd = np.ascontiguousarray(np.broadcast_to(d, shape), dtype=np.float64).reshape(-1, shape[len(shape) - 1])
    cdef const double[:, ::1] ff = np.ascontiguousarray(np.broadcast_to(f, shape), dtype=np.float64).reshape(-1, shape[len(shape) - 1])
    out_arr = np.empty((bb.shape[0], bb.shape[1]))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, j, nr = bb.shape[0], n = bb.shape[1]
    cdef double flux, inv = 1.0 / dv, prev
    with nogil:
        for r in range(nr):
            prev = 0.0
            for j in range(n - 1):
                flux = 0.25 * (bb[r, j] + bb[r, j + 1]) * (ff[r, j] + ff[r, j + 1]) \
                    + (dd[r, j + 1] * ff[r, j + 1] - dd[r, j] * ff[r, j]) * inv
                out[r, j] = (flux - prev) * inv
                prev = flux
            out[r, n - 1] = -prev * inv
            out[r, 0] *= 2.0
            out[r, n - 1] *= 2.0
    return out_arr.reshape(shape)


def fp_tridiag(b, d, double dv):
    shape = np.broadcast(b, d).shape
    cdef const double[:, ::1] bb = np.ascontiguousarray(np.broadcast_to(b, shape), dtype=np.float64).reshape(-1, shape[len(shape) - 1])
    cdef const double[:, ::1] dd = np.ascontiguousarray(np.broadcast_to(d, shape), dtype=np.float64).reshape(-1, shape[len(shape) - 1])
    cdef Py_ssize_t r, j, nr = bb.shape[0], n = bb.shape[1]
    lo_arr = np.zeros((nr, n))
    di_arr = np.zeros((nr, n))
    up_arr = np.zeros((nr, n))
    cdef double[:, ::1] lo = lo_arr
    cdef double[:, ::1] di = di_arr
    cdef double[:, ::1] up = up_arr
    cdef double a, left, right, w, inv = 1.0 / dv
    with nogil:
        for r in range(nr):
            for j in range(n - 1):
                a = 0.25 * (bb[r, j] + bb[r, j + 1])
                left = a - dd[r, j] * inv
                right = a + dd[r, j + 1] * inv
                up[r, j] = right
                di[r, j] += left
                di[r, j + 1] -= right
                lo[r, j + 1] = -left
            for j in range(n):
                w = inv
                if j == 0 or j == n - 1:
                    w = 2.0 * inv
                lo[r, j] *= w
                di[r, j] *= w
                up[r, j] *= w
    return lo_arr.reshape(shape), di_arr.reshape(shape), up_arr.reshape(shape)


def block_tridiag_factor(lower, diag, upper):
    # blocks are transposed once so LAPACK sees column-major matrices
    cdef double[:, :, ::1] low = np.array(np.swapaxes(lower, 1, 2), dtype=np.float64, order="C", copy=True)
    dp_arr = np.array(np.swapaxes(diag, 1, 2), dtype=np.float64, order="C", copy=True)
    xs_arr = np.array(np.swapaxes(upper, 1, 2), dtype=np.float64, order="C", copy=True)
    cdef double[:, :, ::1] dp = dp_arr
    cdef double[:, :, ::1] xs = xs_arr
    cdef int n = <int> dp.shape[0], m = <int> dp.shape[1]
    piv_arr = np.zeros((n, m), dtype=np.intc)
    cdef int[:, ::1] piv = piv_arr
    cdef int j, info = 0, bad = -1
    cdef double minus_one = -1.0, one = 1.0
    cdef char trans_n = b'N'
    with nogil:
        for j in range(n):
            if j > 0:
                dgemm(&trans_n, &trans_n, &m, &m, &m, &minus_one, &low[j, 0, 0], &m,
                      &xs[j - 1, 0, 0], &m, &one, &dp[j, 0, 0], &m)
            dgetrf(&m, &m, &dp[j, 0, 0], &m, &piv[j, 0], &info)
            if info != 0:
                bad = j
                break
            if j < n - 1:
                dgetrs(&trans_n, &m, &m, &dp[j, 0, 0], &m, &piv[j, 0], &xs[j, 0, 0], &m, &info)
    if bad >= 0:
        raise np.linalg.LinAlgError(f"singular pivot block at row {bad}")
    return ("c", np.asarray(low), dp_arr, piv_arr, xs_arr)


def block_tridiag_solve(factor, rhs):
    _, low_arr, dp_arr, piv_arr, xs_arr = factor
    cdef double[:, :, ::1] low = low_arr
    cdef double[:, :, ::1] dp = dp_arr
    cdef int[:, ::1] piv = piv_arr
    cdef double[:, :, ::1] xs = xs_arr
    y_arr = np.array(rhs, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] y = y_arr
    cdef int n = <int> dp.shape[0], m = <int> dp.shape[1], j, info = 0, inc = 1, nrhs = 1
    cdef double minus_one = -1.0, one = 1.0
    cdef char trans_n = b'N'
    with nogil:
        dgetrs(&trans_n, &m, &nrhs, &dp[0, 0, 0], &m, &piv[0, 0], &y[0, 0], &m, &info)
        for j in range(1, n):
            dgemv(&trans_n, &m, &m, &minus_one, &low[j, 0, 0], &m, &y[j - 1, 0], &inc,
                  &one, &y[j, 0], &inc)
            dgetrs(&trans_n, &m, &nrhs, &dp[j, 0, 0], &m, &piv[j, 0], &y[j, 0], &m, &info)
        for j in range(n - 2, -1, -1):
            dgemv(&trans_n, &m, &m, &minus_one, &xs[j, 0, 0], &m, &y[j + 1, 0], &inc,
                  &one, &y[j, 0], &inc)
    return y_arr


def bc_drift_sharp(f, v, delta):
    # Linear interpolation commutes with multiplication by v_j, so the window
    # integral of (v_j - w) f(w) is v_j I[f] - I[w f]; prefix sums of f and
    # v f give the whole-cell trapezoid part of both in O(1) per node.
    cdef const double[:, ::1] ff = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] dl = np.ascontiguousarray(delta, dtype=np.float64)
    cdef Py_ssize_t q, j, k, nq = ff.shape[0], n = ff.shape[1]
    out_arr = np.empty((nq, n))
    cdef double[:, ::1] out = out_arr
    s0_arr = np.empty(n + 1)
    s1_arr = np.empty(n + 1)
    cdef double[::1] s0 = s0_arr
    cdef double[::1] s1 = s1_arr
    cdef double dv = (vv[n - 1] - vv[0]) / (n - 1), acc, lim, theta, near, far, vj
    cdef Py_ssize_t lo, hi, reach
    with nogil:
        for q in range(nq):
            s0[0] = 0.0
            s1[0] = 0.0
            for k in range(n):
                s0[k + 1] = s0[k] + ff[q, k]
                s1[k + 1] = s1[k] + vv[k] * ff[q, k]
            lim = dl[q] * (1.0 + 1e-12)
            reach = <Py_ssize_t> (lim / dv)
            while (reach + 1) * dv <= lim:
                reach += 1
            while reach > 0 and reach * dv > lim:
                reach -= 1
            theta = dl[q] / dv - reach
            if theta < 0.0:
                theta = 0.0
            if theta > 1.0:
                theta = 1.0
            near = dv * theta * (1.0 - 0.5 * theta)
            far = 0.5 * dv * theta * theta
            for j in range(n):
                vj = vv[j]
                lo = j - reach
                if lo < 0:
                    lo = 0
                hi = j + reach
                if hi > n - 1:
                    hi = n - 1
                acc = vj * (s0[hi + 1] - s0[lo]) - (s1[hi + 1] - s1[lo])
                acc = dv * (acc - 0.5 * ((vj - vv[lo]) * ff[q, lo] + (vj - vv[hi]) * ff[q, hi]))
                if theta > 0.0:
                    if j - reach >= 1:
                        acc += near * (vj - vv[j - reach]) * ff[q, j - reach]
                        acc += far * (vj - vv[j - reach - 1]) * ff[q, j - reach - 1]
                    if j + reach <= n - 2:
                        acc += near * (vj - vv[j + reach]) * ff[q, j + reach]
                        acc += far * (vj - vv[j + reach + 1]) * ff[q, j + reach + 1]
                out[q, j] = acc
    return out_arr
