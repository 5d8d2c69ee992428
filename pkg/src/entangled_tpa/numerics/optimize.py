"""Bracketed root finding, 1-D maximization and Richardson differentiation."""

from __future__ import annotations

import math
from typing import Callable

from ..errors import NonConvergence

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float,
                        xtol: float = 0.0, rtol: float = 4e-16, maxiter: int = 200) -> float:
    """Root of ``f`` inside ``[lo, hi]`` where ``f(lo) * f(hi) < 0``.

    Illinois-modified secant steps polish the root; every third iteration is a
    forced bisection so the bracket keeps halving on badly scaled functions.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError(f"root is not bracketed: f({a:g})={fa:g}, f({b:g})={fb:g}")
    side = 0
    for it in range(maxiter):
        x = b - fb * (b - a) / (fb - fa)
        if it % 3 == 2 or not (min(a, b) < x < max(a, b)):
            x = 0.5 * (a + b)
        fx = f(x)
        if fx == 0.0:
            return x
        if fx * fb < 0.0:
            a, fa = b, fb
            b, fb = x, fx
            side = 0
        else:
            b, fb = x, fx
            if side == -1:
                fa *= 0.5
            side = -1
        if abs(b - a) <= xtol + rtol * abs(b):
            return b if abs(fb) <= abs(fa) else a
    raise NonConvergence(f"root finder exceeded {maxiter} iterations on [{lo:g}, {hi:g}]")


def maximize_scalar(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-10, maxiter: int = 500) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search with
    parabolic interpolation (Brent).  Returns ``(x_star, f(x_star))``.

    ``tol`` is relative to ``|x|`` with a tiny absolute floor.
    """
    a, b = float(lo), float(hi)
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = -f(x)
    d = e = 0.0
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        tol1 = tol * abs(x) + 1e-300
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            return x, -fx
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                use_golden = False
        if use_golden:
            e = (b - x) if x < m else (a - x)
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = -f(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    raise NonConvergence(f"maximize_scalar did not converge in {maxiter} iterations")


def differentiate_central(f: Callable[[float], float], x: float, h: float,
                          levels: int = 3) -> float:
    """Central difference at ``x`` refined by Richardson extrapolation.

    Builds a Neville table from steps h, h/2, ..., h/2**(levels-1); the last
    diagonal entry has truncation error O(h**(2*levels)).
    """
    table: list[list[float]] = []
    step = h
    for i in range(levels):
        row = [(f(x + step) - f(x - step)) / (2.0 * step)]
        for j in range(1, i + 1):
            factor = 4.0**j
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
        table.append(row)
        step *= 0.5
    return table[-1][-1]
