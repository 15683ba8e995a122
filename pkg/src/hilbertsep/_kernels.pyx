# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_kernels_py`` for the contract."""
import numpy as np
from libc.math cimport log, INFINITY

DEF OPTIMAL = 0
DEF UNBOUNDED = 1
DEF ITERATION_LIMIT = 2
DEF RATIO_TIE = 1e-12


cdef void _pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t nr = T.shape[0]
    cdef Py_ssize_t nc = T.shape[1]
    cdef double piv = T[r, c]
    cdef double f
    for j in range(nc):
        T[r, j] = T[r, j] / piv
    for i in range(nr):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(nc):
                T[i, j] = T[i, j] - f * T[r, j]


def pivot(double[:, ::1] T, Py_ssize_t row, Py_ssize_t col):
    with nogil:
        _pivot(T, row, col)


def simplex_loop(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t max_iter,
                 Py_ssize_t bland_after, double tol, double piv_tol):
    cdef Py_ssize_t nrows = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1] - 1
    cdef Py_ssize_t it = 0
    cdef Py_ssize_t i, j, col, row
    cdef double best, ratio, cmin
    cdef int status = OPTIMAL
    with nogil:
        while True:
            col = -1
            if it >= bland_after:
                for j in range(ncols):
                    if T[nrows, j] < -tol:
                        col = j
                        break
            else:
                cmin = INFINITY
                for j in range(ncols):
                    if T[nrows, j] < cmin:
                        cmin = T[nrows, j]
                        col = j
                if not cmin < -tol:
                    col = -1
            if col < 0:
                status = OPTIMAL
                break
            if it >= max_iter:
                status = ITERATION_LIMIT
                break
            best = INFINITY
            for i in range(nrows):
                if T[i, col] > piv_tol:
                    ratio = T[i, ncols] / T[i, col]
                    if ratio < best:
                        best = ratio
            if best == INFINITY:
                status = UNBOUNDED
                break
            row = -1
            for i in range(nrows):
                if T[i, col] > piv_tol:
                    ratio = T[i, ncols] / T[i, col]
                    if ratio <= best + RATIO_TIE:
                        if row < 0:
                            row = i
                        elif it >= bland_after:
                            if basis[i] < basis[row]:
                                row = i
                        elif T[i, col] > T[row, col]:
                            row = i
            _pivot(T, row, col)
            basis[row] = col
            it += 1
    if status == OPTIMAL:
        col = -1
    return status, it, col


def log_ratio_extrema(const double[:, ::1] P, const double[:, ::1] Q):
    cdef Py_ssize_t n = P.shape[0]
    cdef Py_ssize_t m = P.shape[1]
    hi_arr = np.empty(n)
    lo_arr = np.empty(n)
    cdef double[::1] hi = hi_arr
    cdef double[::1] lo = lo_arr
    cdef Py_ssize_t i, j
    cdef double v, a, b
    with nogil:
        for i in range(n):
            a = -INFINITY
            b = INFINITY
            for j in range(m):
                v = log(P[i, j]) - log(Q[i, j])
                if v > a:
                    a = v
                if v < b:
                    b = v
            hi[i] = a
            lo[i] = b
    return hi_arr, lo_arr
