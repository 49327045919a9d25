"""Select between numba-compiled kernels and the pure-numpy fallbacks.

The choice is made once, at import time, from the ``FAREYGAUSS_DISABLE_NUMBA``
environment variable. Both paths compute the same quantities; the numpy path
exists for platforms without numba and as a reference in the test-suite.
"""

from __future__ import annotations

import os

DISABLE_ENV = "FAREYGAUSS_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is too old for numba; OpenMP avoids the probe warning
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def _disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n: int | None) -> None:
    """Cap numba's worker pool. Results never depend on the thread count."""
    if n is None or not HAVE_NUMBA:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
