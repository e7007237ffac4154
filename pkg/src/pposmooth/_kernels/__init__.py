"""Backend selection for the MLP kernels.

The compiled Cython extension is preferred when present; set
``PPOSMOOTH_BACKEND=numpy`` to force the pure-Python fallback (used by the
benchmark to compare both).
"""
from __future__ import annotations

import os

from . import numpy_backend

_forced = os.environ.get("PPOSMOOTH_BACKEND", "").strip().lower()

if _forced in ("numpy", "python"):
    _impl = numpy_backend
elif _forced in ("cython", "c", "ext"):
    from . import _core as _impl  # hard import: fail loudly when forced
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = numpy_backend

BACKEND_NAME = _impl.NAME
mlp_forward = _impl.mlp_forward
mlp_backward = _impl.mlp_backward

__all__ = ["BACKEND_NAME", "mlp_forward", "mlp_backward", "numpy_backend"]
