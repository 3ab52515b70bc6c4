"""Numba toggle.

Set ``BIDEGREE_DISABLE_JIT=1`` before import to run every kernel through its
pure-numpy/Python path. Numba being absent has the same effect.
"""

import os

_DISABLED = os.environ.get("BIDEGREE_DISABLE_JIT", "0").lower() in ("1", "true", "yes")

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available, else return it untouched."""
    if not HAVE_NUMBA:  # pragma: no cover
        return fn
    return _numba.njit(cache=True)(fn)
