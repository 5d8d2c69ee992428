"""Adaptive Gauss-Kronrod (G7/K15) quadrature on intervals and 2-D boxes.

Integrands are called with numpy arrays of nodes and must return arrays of the
same shape (real or complex).  Infinite endpoints are handled by the usual
rational maps onto finite intervals.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import NonConvergence

DEFAULT_RTOL = 1e-8
DEFAULT_MAX_PANELS = 100_000

# 15-point Kronrod abscissae (non-negative half) with the embedded 7-point
# Gauss weights at the odd positions.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:15:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    abs_error_estimate: float
    evaluations: int


def _mapped(f: Callable, a: float, b: float, scale: float):
    """Return (g, lo, hi) with a finite interval for possibly infinite [a, b].

    ``scale`` is the length over which the integrand varies; it sets where the
    rational map concentrates nodes.
    """
    if math.isfinite(a) and math.isfinite(b):
        return f, a, b
    if math.isfinite(a):
        # x = a + scale * t/(1-t), t in [0, 1)
        def g(t):
            s = 1.0 - t
            return f(a + scale * t / s) * scale / (s * s)
        return g, 0.0, 1.0
    if math.isfinite(b):
        def g(t):
            s = 1.0 - t
            return f(b - scale * t / s) * scale / (s * s)
        return g, 0.0, 1.0

    def g(t):
        s = 1.0 - t * t
        return f(scale * t / s) * scale * (1.0 + t * t) / (s * s)
    return g, -1.0, 1.0


def _panel(g, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    vals = np.asarray(g(mid + half * _NODES))
    kron = half * np.dot(_KRONROD, vals)
    gauss = half * np.dot(_GAUSS, vals)
    return kron, abs(kron - gauss)


def _integrate_1d(f, a, b, rtol, atol, max_panels, scale=1.0):
    g, lo, hi = _mapped(f, a, b, scale)
    value, err = _panel(g, lo, hi)
    evaluations = 15
    heap = [(-err, lo, hi, value, err)]
    total, total_err = value, err
    n_panels = 1
    while total_err > max(atol, rtol * abs(total)):
        if n_panels >= max_panels:
            raise NonConvergence(
                f"quadrature budget of {max_panels} panels exhausted "
                f"(estimate {total!r}, error {total_err:.3g})")
        _, p_lo, p_hi, p_val, p_err = heapq.heappop(heap)
        p_mid = 0.5 * (p_lo + p_hi)
        if not p_lo < p_mid < p_hi:
            raise NonConvergence("panel width reached floating-point resolution")
        left, left_err = _panel(g, p_lo, p_mid)
        right, right_err = _panel(g, p_mid, p_hi)
        evaluations += 30
        n_panels += 1
        heapq.heappush(heap, (-left_err, p_lo, p_mid, left, left_err))
        heapq.heappush(heap, (-right_err, p_mid, p_hi, right, right_err))
        # re-sum rather than update incrementally to keep roundoff bounded
        total = sum(item[3] for item in heap)
        total_err = sum(item[4] for item in heap)
    return QuadratureResult(total, float(total_err), evaluations)


def integrate_adaptive(f: Callable, domain: Sequence, tol: float = DEFAULT_RTOL, *,
                       abs_tol: float = 0.0,
                       max_panels: int = DEFAULT_MAX_PANELS,
                       scale: float = 1.0) -> QuadratureResult:
    """Integrate ``f`` over an interval or a product of two intervals.

    Parameters
    ----------
    f : callable
        ``f(x)`` for a 1-D domain ``(a, b)``; ``f(x, y)`` for a 2-D domain
        ``((a, b), (c, d))``.  Must accept and return numpy arrays.
    domain : tuple
        Interval endpoints; ``±inf`` allowed.
    tol : float
        Relative tolerance on the result.
    abs_tol : float
        Absolute floor for the tolerance, for integrals that may vanish.
    max_panels : int
        Subdivision budget per 1-D pass.
    scale : float
        Characteristic length for infinite intervals (ignored otherwise).

    Raises
    ------
    NonConvergence
        When the budget is exhausted before the tolerance is met.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    first = domain[0]
    if np.ndim(first) == 0:
        a, b = domain
        return _integrate_1d(f, float(a), float(b), tol, abs_tol, max_panels, scale)

    (a, b), (c, d) = domain
    inner_err = [0.0]
    inner_evals = [0]
    inner_tol = 0.1 * tol

    def outer(xs):
        vals = []
        for x in np.ravel(xs):
            res = _integrate_1d(lambda y, x=x: f(np.full_like(y, x), y), float(c), float(d),
                                inner_tol, 0.1 * abs_tol, max_panels, scale)
            inner_err[0] = max(inner_err[0], res.abs_error_estimate)
            inner_evals[0] += res.evaluations
            vals.append(res.value)
        return np.asarray(vals).reshape(np.shape(xs))

    res = _integrate_1d(outer, float(a), float(b), tol, abs_tol, max_panels, scale)
    # inner errors are bounded by inner_tol * |inner value|; widen by the outer span
    span = (b - a) if math.isfinite(b - a) else 1.0
    return QuadratureResult(res.value, res.abs_error_estimate + inner_err[0] * abs(span),
                            res.evaluations + inner_evals[0])
