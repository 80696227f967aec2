"""Backend selection for the numeric kernels.

Every hot kernel exists twice: a loop version compiled with ``numba.njit``
and a vectorised pure-numpy version. Setting ``FRECHETPROJ_DISABLE_JIT=1``
(or running without numba installed) selects the numpy path at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

_FLAG = "FRECHETPROJ_DISABLE_JIT"

HAVE_NUMBA = numba is not None
USE_JIT = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")
BACKEND = "numba" if USE_JIT else "numpy"


def njit(fn):
    """Compile ``fn`` lazily with numba, or return None when numba is absent."""
    if numba is None:
        return None
    return numba.njit(cache=True, nogil=True)(fn)


def pick(jitted, fallback):
    return jitted if USE_JIT and jitted is not None else fallback
