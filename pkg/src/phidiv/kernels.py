"""Backend selection for the sampling kernels.

The compiled extension is used when importable. Setting ``PHIDIV_PURE_PYTHON=1``
forces the numpy fallback. Both produce identical counts for identical seeds.
"""
import os

from . import _kernels_py

if os.environ.get("PHIDIV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

categorical_draws = _impl.categorical_draws
categorical_counts = _impl.categorical_counts

__all__ = ["BACKEND", "categorical_counts", "categorical_draws"]
