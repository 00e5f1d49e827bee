"""Kernel backend selection.

The hot inner loops in :mod:`biased_shadows._kernels` are written as plain
Python loops over NumPy arrays and compiled with ``numba.njit`` when
available.  Setting the environment variable ``BIASED_SHADOWS_BACKEND=numpy``
before import skips the JIT and runs the identical code paths interpreted,
which is slow but produces bit-for-bit identical results (useful for
debugging and for environments without numba).

``benchmarks/bench_kernels.py`` times both paths against each other.
"""

import functools
import os

import numpy as np

_ENV_VAR = "BIASED_SHADOWS_BACKEND"
_requested = os.environ.get(_ENV_VAR, "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise RuntimeError(
        f"unrecognized {_ENV_VAR}={_requested!r}; expected 'numba' or 'numpy'"
    )

ACTIVE_BACKEND = "numpy"
if _requested == "numba":
    try:
        from numba import njit as _njit

        ACTIVE_BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        ACTIVE_BACKEND = "numpy"


def _interpreted(func):
    # uint64 arithmetic wraps on purpose inside the kernels; silence the
    # NumPy scalar overflow warnings that LLVM-compiled code never emits.
    @functools.wraps(func)
    def wrapper(*args):
        with np.errstate(over="ignore"):
            return func(*args)

    wrapper.__wrapped__ = func
    return wrapper


def jit(func):
    """Compile ``func`` on the active backend (identity on the numpy path)."""
    if ACTIVE_BACKEND == "numba":
        return _njit(cache=True)(func)
    return _interpreted(func)


def python_version(kernel):
    """Interpreted twin of a kernel, regardless of the active backend."""
    if hasattr(kernel, "py_func"):  # numba dispatcher
        return _interpreted(kernel.py_func)
    return kernel
