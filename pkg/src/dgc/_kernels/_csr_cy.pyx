# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR x dense kernels; the hot loop of every propagation scheme.

Row results accumulate in CSR storage order (fixed reduction order), so
repeated runs are bit-identical.
"""
from libc.stdint cimport int64_t


def spmm(const int64_t[::1] rows, const int64_t[::1] cols,
         const double[::1] vals, const double[:, ::1] x,
         double[:, ::1] out):
    """out = S @ x."""
    cdef Py_ssize_t n = rows.shape[0] - 1
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, j, p, c
    cdef double w
    with nogil:
        for i in range(n):
            for j in range(d):
                out[i, j] = 0.0
            for p in range(rows[i], rows[i + 1]):
                c = cols[p]
                w = vals[p]
                for j in range(d):
                    out[i, j] += w * x[c, j]


def euler_step(const int64_t[::1] rows, const int64_t[::1] cols,
               const double[::1] vals, const double[:, ::1] x,
               double dt, double[:, ::1] out):
    """out = (1 - dt) * x + dt * (S @ x), one pass over the stored entries."""
    cdef Py_ssize_t n = rows.shape[0] - 1
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, j, p, c
    cdef double w, omdt = 1.0 - dt
    with nogil:
        for i in range(n):
            for j in range(d):
                out[i, j] = 0.0
            for p in range(rows[i], rows[i + 1]):
                c = cols[p]
                w = vals[p]
                for j in range(d):
                    out[i, j] += w * x[c, j]
            for j in range(d):
                out[i, j] = omdt * x[i, j] + dt * out[i, j]


def laplacian_apply(const int64_t[::1] rows, const int64_t[::1] cols,
                    const double[::1] vals, const double[:, ::1] x,
                    double[:, ::1] out):
    """out = x - S @ x (L = I - S applied without materializing L)."""
    cdef Py_ssize_t n = rows.shape[0] - 1
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, j, p, c
    cdef double w
    with nogil:
        for i in range(n):
            for j in range(d):
                out[i, j] = 0.0
            for p in range(rows[i], rows[i + 1]):
                c = cols[p]
                w = vals[p]
                for j in range(d):
                    out[i, j] += w * x[c, j]
            for j in range(d):
                out[i, j] = x[i, j] - out[i, j]
