"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``HP_ROBUST_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("HP_ROBUST_PURE", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

legendre_table = _impl.legendre_table
legendre_series = _impl.legendre_series
legendre_der = _impl.legendre_der
element_matrix = _impl.element_matrix

__all__ = ["BACKEND", "legendre_table", "legendre_series", "legendre_der", "element_matrix"]
