import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from entangled_tpa.errors import NonConvergence
from entangled_tpa.fiber import FiberSpec, dispersion_function, _beta_bracket, solve_propagation_constant
from entangled_tpa.constants import wavelength_to_omega
from entangled_tpa.numerics import (differentiate_central, find_root_bracketed,
                                    integrate_adaptive, maximize_scalar)


# -- quadrature ------------------------------------------------------------------

def test_exponential_half_line():
    res = integrate_adaptive(lambda x: np.exp(-x), (0.0, math.inf), 1e-10)
    assert res.value == pytest.approx(1.0, rel=1e-10)
    assert res.abs_error_estimate >= 0 and res.evaluations > 0


def test_gaussian_whole_line():
    sigma = 3.11e12
    res = integrate_adaptive(lambda x: np.exp(-(x / sigma) ** 2), (-math.inf, math.inf), 1e-10,
                             scale=sigma)
    assert res.value == pytest.approx(sigma * math.sqrt(math.pi), rel=1e-10)


def test_separable_2d_against_1d_oracle():
    # K0-like radial decay times a cos^2 azimuthal factor
    a = 1.0

    def f(r, phi):
        return sp.k0(r) ** 2 * np.cos(phi) ** 2 * r

    res = integrate_adaptive(f, ((a, 40.0), (0.0, 2 * math.pi)), 1e-10)
    # fixed high-order Gauss-Legendre oracle on a graded grid
    x, w = np.polynomial.legendre.leggauss(200)
    edges = a + np.concatenate([[0.0], np.geomspace(1e-3, 39.0, 60)])
    radial = sum(np.sum(0.5 * (hi - lo) * w * (lambda r: sp.k0(r) ** 2 * r)(
        0.5 * (hi - lo) * x + 0.5 * (hi + lo))) for lo, hi in zip(edges[:-1], edges[1:]))
    assert res.value == pytest.approx(radial * math.pi, rel=1e-9)


def test_splitting_invariance():
    f = lambda x: np.sin(3 * x) * np.exp(-x / 4) + 1.0  # noqa: E731
    whole = integrate_adaptive(f, (0.0, 7.0), 1e-11)
    left = integrate_adaptive(f, (0.0, 2.3), 1e-11)
    right = integrate_adaptive(f, (2.3, 7.0), 1e-11)
    budget = whole.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate
    assert abs(whole.value - (left.value + right.value)) <= max(budget, 1e-14 * abs(whole.value))


def test_budget_exhaustion():
    with pytest.raises(NonConvergence):
        integrate_adaptive(lambda x: np.sin(1.0 / x), (1e-6, 1.0), 1e-13, max_panels=20)


def test_bad_tolerance():
    with pytest.raises(ValueError):
        integrate_adaptive(np.exp, (0.0, 1.0), 0.0)


# -- roots -------------------------------------------------------------------------

def test_linear_root():
    assert find_root_bracketed(lambda x: 3 * x - 1, -5, 5) == pytest.approx(1 / 3, rel=1e-15)


def test_cubic_root():
    root = find_root_bracketed(lambda x: x**3 - 2 * x - 5, 2.0, 3.0)
    assert root == pytest.approx(2.0945514815423265, rel=1e-14)


def test_root_requires_bracket():
    with pytest.raises(ValueError):
        find_root_bracketed(lambda x: x * x + 1, -1, 1)


def test_dispersion_root_against_sign_scan():
    fiber = FiberSpec(350e-9, 5e-3)
    omega = wavelength_to_omega(778e-9)
    lo, hi = _beta_bracket(fiber, omega)
    beta = solve_propagation_constant(fiber, omega)
    grid = np.linspace(lo, hi, 200_001)
    vals = dispersion_function(fiber, omega, grid)
    flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    candidates = 0.5 * (grid[flips] + grid[flips + 1])
    # the guided root is the one with the largest effective index
    assert beta == pytest.approx(candidates.max(), rel=1e-6)


# -- maximization ------------------------------------------------------------------

def test_parabola_vertex():
    x, fx = maximize_scalar(lambda x: -(x - 1.3) ** 2 + 2, -4, 7, tol=1e-12)
    assert x == pytest.approx(1.3, abs=1e-8) and fx == pytest.approx(2.0, abs=1e-15)


def test_kink():
    x, _ = maximize_scalar(lambda x: -abs(x - 0.37), 0, 1, tol=1e-12)
    assert x == pytest.approx(0.37, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 4.0))
def test_derivative_changes_sign_at_maximum(center):
    f = lambda x: math.exp(-(x - center) ** 2) * (1 + 0.1 * x)  # noqa: E731
    x, _ = maximize_scalar(f, 0.0, 6.0, tol=1e-11)
    h = 1e-4
    assert f(x - h) <= f(x) >= f(x + h)
    assert differentiate_central(f, x - 1e-3, 1e-4) > 0 > differentiate_central(f, x + 1e-3, 1e-4)


# -- derivatives ---------------------------------------------------------------------

def test_square():
    assert differentiate_central(lambda x: x * x, 1.7, 0.1) == pytest.approx(3.4, rel=1e-13)


def test_sine_at_zero():
    assert differentiate_central(math.sin, 0.0, 0.1) == pytest.approx(1.0, rel=1e-10)


def test_beta_derivative_against_five_point_stencil():
    fiber = FiberSpec(350e-9, 5e-3)
    omega = wavelength_to_omega(778e-9)
    beta = lambda w: solve_propagation_constant(fiber, w)  # noqa: E731
    h = 1e-3 * omega
    five = (-beta(omega + 2 * h) + 8 * beta(omega + h) - 8 * beta(omega - h)
            + beta(omega - 2 * h)) / (12 * h)
    assert differentiate_central(beta, omega, h) == pytest.approx(five, rel=1e-7)
