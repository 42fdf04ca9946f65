"""Batch evaluation of compiled expressions.

The compiled extension ``minsurf._kernel`` is used when it was built;
otherwise the numpy implementation in ``minsurf._kernel_py`` takes over.
Setting ``MINSURF_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernel_py
from .errors import DivisionByZero, LnBranchError, ZeroDivisorError
from .kalgebra import LORENTZ, KScalar

if os.environ.get("MINSURF_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernel as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_BACKENDS = {"python": _kernel_py.eval_program}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled.eval_program


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def evaluate_program(program, zre, zim, backend: str | None = None, extended: bool = False):
    """Evaluate ``program`` at the points ``zre + e*zim``; returns two arrays.

    ``extended=True`` evaluates in ``np.longdouble`` with the numpy backend.
    """
    dtype = np.longdouble if extended else np.float64
    fn = _BACKENDS["python" if extended else (backend or BACKEND)]
    zre = np.ascontiguousarray(zre, dtype=dtype)
    zim = np.ascontiguousarray(zim, dtype=dtype)
    shape = np.broadcast_shapes(zre.shape, zim.shape)
    zre = np.ascontiguousarray(np.broadcast_to(zre, shape)).ravel()
    zim = np.ascontiguousarray(np.broadcast_to(zim, shape)).ravel()
    out_re = np.empty_like(zre)
    out_im = np.empty_like(zre)
    lorentz = program.algebra is LORENTZ
    args = (program.ops, program.ipar, program.cre, program.cim,
            lorentz, zre, zim, out_re, out_im, program.depth)
    code, idx = fn(*args, dtype=dtype) if extended else fn(*args)
    if code:
        point = KScalar(program.algebra, float(zre[idx]), float(zim[idx]))
        if code == 2:
            raise LnBranchError(f"ln outside its principal region at {point!r} in {program.source}")
        if lorentz:
            raise ZeroDivisorError(point, operation=f"eval {program.source}")
        raise DivisionByZero(point, operation=f"eval {program.source}")
    return out_re.reshape(shape), out_im.reshape(shape)
