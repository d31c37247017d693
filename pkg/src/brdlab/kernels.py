"""Kernel selection: the compiled extension when importable, else Python.

Set ``BRDLAB_PURE=1`` to force the Python implementation.
"""

from __future__ import annotations

import os

from brdlab import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BRDLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from brdlab import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

canon = _impl.canon
embeds = _impl.embeds
count_embeddings = _impl.count_embeddings
embeddings = _kernels_py.embeddings

__all__ = ["BACKEND", "canon", "embeds", "count_embeddings", "embeddings"]
