"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set ``SCORELIFE_PURE=1`` to force the numpy fallback (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import pure
from .pure import decode_digit_matrix  # noqa: F401  (shared helper)

if os.environ.get("SCORELIFE_PURE", "0") not in ("", "0"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

cartpole_scores = _impl.cartpole_scores
cycle_scores = _impl.cycle_scores
