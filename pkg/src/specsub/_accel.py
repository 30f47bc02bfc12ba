"""Optional numba acceleration.

Set ``SPECSUB_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable. The flag is read once, at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get("SPECSUB_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(func):
    """Compile ``func`` with numba in nopython mode when numba is installed.

    Without numba the plain Python function is returned so the module still
    imports; callers only dispatch to it when :data:`USE_NUMBA` is true.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
