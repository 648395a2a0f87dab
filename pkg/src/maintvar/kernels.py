"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; otherwise
the numpy/pure-Python ``_pykernels`` stand in. Set ``MAINTVAR_PURE_PYTHON=1``
to force the fallback.
"""

from __future__ import annotations

import os

from maintvar import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("MAINTVAR_PURE_PYTHON"):
    try:
        from maintvar import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

best_split = _impl.best_split
predict_tree = _impl.predict_tree
forecast_recursive = _impl.forecast_recursive
