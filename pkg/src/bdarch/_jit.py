"""Optional numba compilation for the hot kernels.

Every hot kernel exists twice: an explicit-loop version compiled with
``numba.njit`` and a vectorized numpy version. ``BDARCH_DISABLE_NUMBA=1``
(read at import) selects the numpy versions everywhere.
"""

import os

try:
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("BDARCH_DISABLE_NUMBA", "0").lower() not in (
    "1",
    "true",
    "yes",
)


def jit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is in use, identity otherwise."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        return _njit(**kwargs)(f) if USE_NUMBA else f

    return wrap(func) if func is not None else wrap


def compiled(func, **kwargs):
    """Always-compiled copy of ``func`` (benchmarks and cross-path tests)."""
    if not HAS_NUMBA:  # pragma: no cover
        return func
    kwargs.setdefault("cache", True)
    return _njit(**kwargs)(func)


def select(loops, numpy_version):
    """Pick the loop kernel (compiled) or the numpy kernel per the env flag."""
    return jit(loops) if USE_NUMBA else numpy_version
