"""Loop kernels for the special functions.

Each kernel writes into a preallocated output array so the same source runs
compiled (numba) or interpreted.  Vectorized numpy counterparts live next to
the dispatchers in :mod:`entangled_tpa.numerics.special`.
"""

import math

import numpy as np

from .._accel import jit

SQRT_PI = math.sqrt(math.pi)
TWO_OVER_SQRT_PI = 2.0 / SQRT_PI

# Radius inside which Erfi is summed from its Taylor series.  At |z| = 2 on the
# diagonal the sum of term magnitudes is ~20x the result, so double precision
# keeps ~1e-15 relative accuracy; the Faddeeva branch takes over outside.
SERIES_RADIUS = 2.0


@jit
def erfi_series_scalar(z):
    z2 = z * z
    term = z
    total = z
    k = 0
    while k < 200:
        k += 1
        term = term * z2 / k
        inc = term / (2 * k + 1)
        total += inc
        if abs(inc) <= 1e-17 * abs(total):
            break
    return TWO_OVER_SQRT_PI * total


@jit
def weideman_upper(z, coeffs, scale):
    """Faddeeva w(z) for Im z >= 0 by Weideman's rational expansion."""
    denom = scale - 1j * z
    ratio = (scale + 1j * z) / denom
    acc = 0.0 + 0.0j
    for c in coeffs:
        acc = acc * ratio + c
    return 2.0 * acc / (denom * denom) + (1.0 / SQRT_PI) / denom


@jit
def faddeeva_scalar(z, coeffs, scale):
    if z.imag >= 0.0:
        return weideman_upper(z, coeffs, scale)
    # w(z) = 2 exp(-z^2) - w(-z) reflects into the upper half plane
    return 2.0 * np.exp(-z * z) - weideman_upper(-z, coeffs, scale)


@jit
def erfi_scalar(z, coeffs, scale):
    if abs(z) < SERIES_RADIUS:
        return erfi_series_scalar(z)
    sign = 1.0
    if z.imag < 0.0:
        # odd function: evaluate at -z so the Faddeeva argument sits in Im >= 0
        z = -z
        sign = -1.0
    w = weideman_upper(z, coeffs, scale)
    # Erfi(z) = i - i exp(z^2) w(z); combine exponents so overflow stays inf-safe
    grown = np.exp(z * z + np.log(w))
    value = sign * (1j - 1j * grown)
    if z.imag == 0.0:
        # Re w(x) = exp(-x^2) is below the absolute accuracy of w on the real
        # axis, so the imaginary part here is pure rounding noise
        return complex(value.real, 0.0)
    return value


@jit
def scaled_erfi_minus_i_scalar(z, coeffs, scale):
    """exp(-z^2) * (Erfi(z) - i) without forming Erfi(z) itself."""
    if z.imag >= 0.0:
        return -1j * weideman_upper(z, coeffs, scale)
    return -2j * np.exp(-z * z) + 1j * weideman_upper(-z, coeffs, scale)


@jit
def erfi_loop(zs, coeffs, scale, out):
    for i in range(zs.shape[0]):
        out[i] = erfi_scalar(zs[i], coeffs, scale)


@jit
def faddeeva_loop(zs, coeffs, scale, out):
    for i in range(zs.shape[0]):
        out[i] = faddeeva_scalar(zs[i], coeffs, scale)


@jit
def scaled_erfi_minus_i_loop(zs, coeffs, scale, out):
    for i in range(zs.shape[0]):
        out[i] = scaled_erfi_minus_i_scalar(zs[i], coeffs, scale)


@jit
def gaussian_detuning_sum(nu, weights, sigma, two_delta, gamma1):
    """sum_k w_k exp(-nu_k^2 / (2 sigma^2)) / (2 Delta + 2 nu_k + i Gamma1)."""
    acc = 0.0 + 0.0j
    inv = 1.0 / (2.0 * sigma * sigma)
    for k in range(nu.shape[0]):
        x = nu[k]
        acc += weights[k] * math.exp(-x * x * inv) / (two_delta + 2.0 * x + 1j * gamma1)
    return acc
