"""Backend selection for the compiled kernels.

Set ``LAUNDERGRAPH_DISABLE_JIT=1`` to force the pure-numpy kernels even when
numba is importable.
"""

import os

_FLAG = os.environ.get("LAUNDERGRAPH_DISABLE_JIT", "").strip().lower()
DISABLE_JIT = _FLAG in {"1", "true", "yes", "on"}

try:  # pragma: no cover - depends on the environment
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLE_JIT
