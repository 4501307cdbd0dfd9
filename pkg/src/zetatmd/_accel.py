"""JIT switch for the numeric kernels.

Kernels are written once, in the subset of Python that numba compiles.  With
numba available they run compiled; with ``ZETATMD_DISABLE_NUMBA=1`` in the
environment (or numba missing) the very same functions run as plain Python over
numpy arrays.  Both paths execute the same floating-point operations in the
same order, so their results agree bit for bit.
"""

import os

ENV_FLAG = "ZETATMD_DISABLE_NUMBA"

_disabled = os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba
    from numba import prange

    # skip probing for a TBB runtime (noisy when an old one is installed)
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    numba = None
    prange = range
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def python_impl(func):
    """The uncompiled Python function behind a (possibly) jitted kernel."""
    return getattr(func, "py_func", func)


def set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAVE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def backend():
    return "numba" if HAVE_NUMBA else "python"
