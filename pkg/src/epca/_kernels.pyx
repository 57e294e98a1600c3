# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`epca._kernels_py`."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def linear_scan(const double[:, ::1] factors, const double[:, ::1] increments,
                const double[::1] y0):
    """y[0] = y0, y[j+1] = factors[j] * y[j] + increments[j] (componentwise)."""
    cdef Py_ssize_t n = factors.shape[0]
    cdef Py_ssize_t d = factors.shape[1]
    cdef Py_ssize_t j, k
    if increments.shape[0] != n or increments.shape[1] != d or y0.shape[0] != d:
        raise ValueError("shape mismatch in linear_scan")
    out = np.empty((n + 1, d), dtype=np.float64)
    cdef double[:, ::1] y = out
    for k in range(d):
        y[0, k] = y0[k]
    for j in range(n):
        for k in range(d):
            y[j + 1, k] = factors[j, k] * y[j, k] + increments[j, k]
    return out


def window_sums(const double[::1] sub, Py_ssize_t m):
    """Sums of every run of ``m`` consecutive entries."""
    cdef Py_ssize_t n = sub.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    if m < 1 or m > n:
        raise ValueError("window longer than data")
    out = np.empty(n - m + 1, dtype=np.float64)
    cdef double[::1] w = out
    for i in range(n - m + 1):
        acc = 0.0
        for j in range(m):
            acc += sub[i + j]
        w[i] = acc
    return out


def suffix_max(const double[::1] values):
    """out[i] = max(values[i:])."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] r = out
    if n == 0:
        return out
    r[n - 1] = values[n - 1]
    for i in range(n - 2, -1, -1):
        r[i] = values[i] if values[i] > r[i + 1] else r[i + 1]
    return out
