"""Selects the collision loop backend at import time.

The compiled extension is preferred; the pure python fallback is used
when the extension is unavailable or when the environment variable
RADGAS_PURE_PYTHON is set to a non-empty value other than "0".
"""

from __future__ import annotations

import os


def _select():
    forced = os.environ.get("RADGAS_PURE_PYTHON", "").strip()
    if forced not in ("", "0"):
        from . import _kernels_py
        return _kernels_py, "python"
    try:
        from . import _kernels
        return _kernels, "compiled"
    except ImportError:
        from . import _kernels_py
        return _kernels_py, "python"


kernels, BACKEND = _select()
