"""Kernel dispatch.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``EPCA_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy fallback is used. ``BACKEND`` names the active one.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("EPCA_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

linear_scan = _active.linear_scan
window_sums = _active.window_sums
suffix_max = _active.suffix_max

__all__ = ["BACKEND", "linear_scan", "window_sums", "suffix_max",
           "python_backend", "compiled_backend"]
