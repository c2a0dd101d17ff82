"""Selects the compiled lattice-sum kernels when available.

Set ``QUATELL_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
pair_sum = _fallback.pair_sum

if os.environ.get("QUATELL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        pair_sum = _kernels.pair_sum
        BACKEND = "cython"

__all__ = ["BACKEND", "pair_sum"]
