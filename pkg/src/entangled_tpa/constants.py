"""CODATA constants in SI units, re-exported from scipy."""

from scipy import constants as _c

C = _c.c
HBAR = _c.hbar
EPS0 = _c.epsilon_0
E_CHARGE = _c.e

#: Second-mode (TE01/TM01) cutoff of a step-index guide: first zero of J0.
V_CUTOFF = 2.404825557695773


def wavelength_to_omega(wavelength: float) -> float:
    return 2.0 * _c.pi * C / wavelength


def wavelength_span_to_omega(span: float, center_wavelength: float) -> float:
    """Angular-frequency width equivalent to a small wavelength span.

    Uses the first-order conversion 2*pi*c*span/lambda**2.
    """
    return 2.0 * _c.pi * C * span / center_wavelength**2


def omega_span_to_wavelength(span: float, center_wavelength: float) -> float:
    return span * center_wavelength**2 / (2.0 * _c.pi * C)
