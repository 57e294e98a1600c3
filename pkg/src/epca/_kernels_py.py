"""Pure-Python/numpy fallback for the compiled kernels in ``_kernels.pyx``."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def linear_scan(factors, increments, y0):
    """y[0] = y0, y[j+1] = factors[j] * y[j] + increments[j] (componentwise)."""
    factors = np.ascontiguousarray(factors, dtype=np.float64)
    increments = np.ascontiguousarray(increments, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    n, d = factors.shape
    if increments.shape != (n, d) or y0.shape != (d,):
        raise ValueError("shape mismatch in linear_scan")
    out = np.empty((n + 1, d))
    out[0] = y0
    # no closed-form cumulative product: it underflows for fast modes
    for j in range(n):
        out[j + 1] = factors[j] * out[j] + increments[j]
    return out


def window_sums(sub, m):
    """Sums of every run of ``m`` consecutive entries."""
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    if m < 1 or m > sub.shape[0]:
        raise ValueError("window longer than data")
    return sliding_window_view(sub, m).sum(axis=1)


def suffix_max(values):
    """out[i] = max(values[i:])."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    return np.maximum.accumulate(values[::-1])[::-1].copy()
