"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy fallback
is used. Setting ``HILBERTSEP_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from hilbertsep import _kernels_py

OPTIMAL = _kernels_py.OPTIMAL
UNBOUNDED = _kernels_py.UNBOUNDED
ITERATION_LIMIT = _kernels_py.ITERATION_LIMIT

_compiled = None
if os.environ.get("HILBERTSEP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from hilbertsep import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled' or 'python')."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def pivot(T, row, col):
    _impl.pivot(T, row, col)


def simplex_loop(T, basis, max_iter, bland_after, tol, piv_tol):
    return _impl.simplex_loop(T, basis, max_iter, bland_after, tol, piv_tol)


def log_ratio_extrema(P, Q):
    P = np.ascontiguousarray(P, dtype=float)
    Q = np.ascontiguousarray(Q, dtype=float)
    return _impl.log_ratio_extrema(P, Q)
