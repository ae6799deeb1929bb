"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version in ``numba_impl`` and a
numpy version in ``numpy_impl`` with identical signatures and outputs. The
active backend is picked once at import time (see ``laundergraph._jit``).
"""

from .._jit import USE_NUMBA
from . import numpy_impl

if USE_NUMBA:
    from . import numba_impl as active
else:
    active = numpy_impl

BACKEND = "numba" if USE_NUMBA else "numpy"

expand_batch = active.expand_batch
component_labels = active.component_labels
best_split = active.best_split
tree_apply = active.tree_apply
svm_cd_epoch = active.svm_cd_epoch
crc64 = active.crc64

__all__ = [
    "BACKEND",
    "active",
    "numpy_impl",
    "expand_batch",
    "component_labels",
    "best_split",
    "tree_apply",
    "svm_cd_epoch",
    "crc64",
]
