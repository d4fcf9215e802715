"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Object (exact) arrays always take the Python path.
"""

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_active = "compiled" if _ckernels is not None else "python"


def available() -> tuple[str, ...]:
    return ("compiled", "python") if _ckernels is not None else ("python",)


def active() -> str:
    return _active


def use_backend(name: str) -> str:
    """Switch backend; returns the previous one."""
    global _active
    if name not in available():
        raise ValueError(f"backend {name!r} not available; have {available()}")
    prev, _active = _active, name
    return prev


def _impl(*arrays):
    if _active == "compiled" and all(a.dtype != object for a in arrays):
        return _ckernels
    return _pykernels


def convolve_pairs(left, right, prod, f, g, wl, out):
    impl = _impl(f, g, out)
    if impl is _ckernels:
        f = np.ascontiguousarray(f, dtype=complex)
        g = np.ascontiguousarray(g, dtype=complex)
        wl = np.ascontiguousarray(wl, dtype=float)
    impl.convolve_pairs(left, right, prod, f, g, wl, out)


def regular_matrix(left, right, prod, pos, f, wl, out):
    impl = _impl(f, out)
    if impl is _ckernels:
        f = np.ascontiguousarray(f, dtype=complex)
        wl = np.ascontiguousarray(wl, dtype=float)
    impl.regular_matrix(left, right, prod, pos, f, wl, out)
