"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``UNIBW_DISABLE_NUMBA=1`` before import to force the numpy path.
"""
import os

_DISABLED = os.environ.get("UNIBW_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available; otherwise return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
