# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels for the hot inner loops.

Accumulation order is pinned left to right and must stay bit-identical to
the numpy fallback in ``_fallback.py`` (which uses cumsum for the same
rounding sequence). Build with -ffp-contract=off; see setup.py.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def affine_forward(const double[:, ::1] weights, const double[::1] bias, const double[::1] x):
    """W x + b with left-to-right accumulation over columns."""
    cdef Py_ssize_t rows = weights.shape[0]
    cdef Py_ssize_t cols = weights.shape[1]
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(rows):
        acc = weights[i, 0] * x[0]
        for j in range(1, cols):
            acc = acc + weights[i, j] * x[j]
        out[i] = acc + bias[i]
    return out_arr


def affine_forward_batch(const double[:, ::1] weights, const double[::1] bias,
                         const double[:, ::1] xs):
    """Row-batched affine map: returns shape (len(xs), rows)."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t rows = weights.shape[0]
    cdef Py_ssize_t cols = weights.shape[1]
    out_arr = np.empty((n, rows), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, i, j
    cdef double acc
    for r in range(n):
        for i in range(rows):
            acc = weights[i, 0] * xs[r, 0]
            for j in range(1, cols):
                acc = acc + weights[i, j] * xs[r, j]
            out[r, i] = acc + bias[i]
    return out_arr


def matvec_transpose(const double[:, ::1] weights, const double[::1] delta):
    """W^T delta with top-to-bottom accumulation over rows."""
    cdef Py_ssize_t rows = weights.shape[0]
    cdef Py_ssize_t cols = weights.shape[1]
    out_arr = np.empty(cols, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for j in range(cols):
        acc = weights[0, j] * delta[0]
        for i in range(1, rows):
            acc = acc + weights[i, j] * delta[i]
        out[j] = acc
    return out_arr


def dot(const double[::1] a, const double[::1] b):
    """Left-to-right dot product."""
    cdef Py_ssize_t n = a.shape[0]
    cdef double acc = a[0] * b[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        acc = acc + a[i] * b[i]
    return acc


def ordered_sum(const double[::1] v):
    """Left-to-right sum."""
    cdef Py_ssize_t n = v.shape[0]
    cdef double acc = v[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        acc = acc + v[i]
    return acc
