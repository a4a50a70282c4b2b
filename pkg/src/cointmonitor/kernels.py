"""Kernel backend selection.

The compiled extension is used when it imports; set ``COINTMONITOR_PURE=1``
to force the numpy fallback.  ``BACKEND`` names the active choice.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("COINTMONITOR_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

theta_counts = _impl.theta_counts
brownian_sup = _impl.brownian_sup

__all__ = ["BACKEND", "theta_counts", "brownian_sup"]
