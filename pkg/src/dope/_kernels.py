"""Kernel backend selection: compiled extension when available, else pure Python.

Set DOPE_PURE_PYTHON=1 to force the fallback (used by the backend-comparison
benchmark and tests).
"""

from __future__ import annotations

import os

if os.environ.get("DOPE_PURE_PYTHON", "0") not in ("", "0"):
    from . import _core_py as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _core_py as _impl

bk_maxflow = _impl.bk_maxflow
icm_sweep = _impl.icm_sweep
BACKEND = _impl.BACKEND


def backend_name() -> str:
    return BACKEND
