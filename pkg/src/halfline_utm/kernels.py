"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set HALFLINE_UTM_KERNELS=py to force the NumPy fallback (used by the
backend-equivalence tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("HALFLINE_UTM_KERNELS", "").lower() in ("py", "numpy"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
phase_matrix = _impl.phase_matrix
weighted_phase_apply = _impl.weighted_phase_apply
