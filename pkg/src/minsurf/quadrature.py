"""Composite Gauss-Legendre integration of 𝕂-valued integrands along segments."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureNonConvergence
from .kalgebra import AlgebraTag

ORDER = 16
TOL = 1e-9
MAX_REFINE = 12


@lru_cache(maxsize=None)
def _rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # map to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def _panel_sum(programs, algebra, start, delta, m, order):
    """Integrate with ``m`` equal panels; returns arrays (nprog, nseg) re/im."""
    x, w = _rule(order)
    nseg = start.shape[0]
    t = (np.arange(m)[:, None] + x[None, :]).ravel() / m  # (m*order,)
    wt = np.tile(w, m) / m
    nodes = start[:, None] + t[None, :] * delta[:, None]  # complex-like pairs packed
    zr, zi = nodes.real.ravel(), nodes.imag.ravel()
    s = algebra.unit_square
    dr, di = delta.real[:, None], delta.imag[:, None]
    out_re = np.empty((len(programs), nseg))
    out_im = np.empty((len(programs), nseg))
    for k, prog in enumerate(programs):
        fr, fi = prog(zr, zi)
        fr = fr.reshape(nseg, -1)
        fi = fi.reshape(nseg, -1)
        gr = fr * dr + s * fi * di
        gi = fr * di + fi * dr
        out_re[k] = gr @ wt
        out_im[k] = gi @ wt
    return out_re, out_im


def integrate_segments(programs, algebra: AlgebraTag, starts, ends,
                       tol: float = TOL, max_refine: int = MAX_REFINE, order: int = ORDER):
    """Integrate each compiled program along every straight segment.

    ``starts``/``ends`` hold points as Python complex numbers (``re + 1j*im``
    packs the two coordinates whatever the algebra).  Panels double until
    successive estimates agree within ``tol * max(1, |I|)``.
    Returns ``(re, im)`` arrays of shape ``(len(programs), nseg)``.
    """
    starts = np.atleast_1d(np.asarray(starts, dtype=complex))
    ends = np.atleast_1d(np.asarray(ends, dtype=complex))
    delta = ends - starts
    nprog, nseg = len(programs), starts.shape[0]
    res_re = np.zeros((nprog, nseg))
    res_im = np.zeros((nprog, nseg))
    active = np.flatnonzero(delta != 0)
    if active.size == 0:
        return res_re, res_im
    m = 1
    prev_re, prev_im = _panel_sum(programs, algebra, starts[active], delta[active], m, order)
    for _ in range(max_refine):
        m *= 2
        cur_re, cur_im = _panel_sum(programs, algebra, starts[active], delta[active], m, order)
        err = np.hypot(cur_re - prev_re, cur_im - prev_im).max(axis=0)
        scale = np.maximum(1.0, np.hypot(cur_re, cur_im).max(axis=0))
        done = err <= tol * scale
        res_re[:, active[done]] = cur_re[:, done]
        res_im[:, active[done]] = cur_im[:, done]
        active = active[~done]
        if active.size == 0:
            return res_re, res_im
        prev_re, prev_im = cur_re[:, ~done], cur_im[:, ~done]
    raise QuadratureNonConvergence(
        f"{active.size} segment(s) did not converge to {tol:g} after {max_refine} refinements"
    )
