"""Numba dispatch.

Hot kernels are written once as plain scalar Python and compiled with
``numba.njit`` when available.  Setting ``COURNOT_DISABLE_JIT=1`` (or running
without numba installed) leaves them uncompiled and routes batch work through
the vectorised numpy implementations instead.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("COURNOT_DISABLE_JIT", "").strip().lower()
JIT_DISABLED = _flag not in ("", "0", "false", "no")

USE_NUMBA = numba is not None and not JIT_DISABLED


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


if USE_NUMBA:
    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if len(args) == 1 and callable(args[0]):
            return numba.njit(**kwargs)(args[0])
        return numba.njit(*args, **kwargs)
else:
    njit = _noop_jit


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
