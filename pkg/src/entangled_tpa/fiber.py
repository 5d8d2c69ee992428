"""Fundamental HE11 mode of a step-index cylinder in vacuum.

The exact vector solution is used (weak guidance fails at n ~ 1.45 against
vacuum).  Radial dependence is Bessel-J inside the core and modified-Bessel-K
outside; U = a*sqrt(n1^2 k^2 - beta^2) and W = a*sqrt(beta^2 - n2^2 k^2) are the
core and cladding transverse parameters, a = D/2.

Field convention: the quasi-linearly polarized HE11 mode with polarization
axis at azimuth ``orientation``::

    E_r   =  i sqrt(2) R_r(r)   cos(phi - orientation)
    E_phi = -i sqrt(2) R_phi(r) sin(phi - orientation)
    E_z   =    sqrt(2) R_z(r)   cos(phi - orientation)

with real radial functions R normalized so R_z(r) = J1(U r/a) in the core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.special import jv, jvp, kve, kvp

from .constants import EPS0, HBAR, V_CUTOFF, C
from .errors import InvalidEigenvalue, NoGuidedMode
from .numerics import differentiate_central, find_root_bracketed, integrate_adaptive

DEFAULT_CORE_INDEX = 1.4537
SCAN_POINTS = 512
BRACKET_MARGIN = 1e-9

#: Photon-energy normalization conventions understood by :func:`normalize_mode`.
#: The value is the time-averaged electric energy, in units of hbar*omega,
#: assigned to one photon in the quantization length.
ENERGY_CONVENTIONS = {"hbar_omega": 1.0, "half_hbar_omega": 0.5}
DEFAULT_ENERGY_CONVENTION = "hbar_omega"

IndexModel = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class FiberSpec:
    """Uniform tapered-fiber waist.

    ``core_index`` is either a constant or a callable ``n(omega)``.
    """

    diameter: float
    length: float
    core_index: IndexModel = DEFAULT_CORE_INDEX
    cladding_index: float = 1.0

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError(f"fiber diameter must be positive, got {self.diameter!r}")
        if not self.length > 0:
            raise ValueError(f"fiber length must be positive, got {self.length!r}")
        if not callable(self.core_index) and not self.core_index > self.cladding_index:
            raise ValueError(f"core index {self.core_index!r} must exceed the cladding index "
                             f"{self.cladding_index!r}")

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter

    def n_core(self, omega: float) -> float:
        n = self.core_index
        return float(n(omega)) if callable(n) else float(n)

    def with_length(self, length: float) -> "FiberSpec":
        return FiberSpec(self.diameter, length, self.core_index, self.cladding_index)


def v_number(fiber: FiberSpec, omega: float) -> float:
    n1 = fiber.n_core(omega)
    return omega / C * fiber.radius * math.sqrt(max(n1**2 - fiber.cladding_index**2, 0.0))


def single_mode_check(fiber: FiberSpec, omega: float) -> bool:
    """True when only HE11 propagates, i.e. V < 2.405."""
    return v_number(fiber, omega) < V_CUTOFF


# -- eigenvalue problem ----------------------------------------------------

def _transverse(fiber, omega, beta):
    k = omega / C
    a = fiber.radius
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    u = a * math.sqrt(max(n1**2 * k**2 - beta**2, 0.0))
    w = a * math.sqrt(max(beta**2 - n2**2 * k**2, 0.0))
    return u, w


def _dispersion_uw(u, w, n1, n2, neff):
    # Hybrid-mode (l = 1) characteristic equation multiplied through by
    # (U J1 W K1)^2 to remove the J1 poles, then divided by U^2 to remove the
    # trivial zero at U -> 0.  Every term is quadratic in (K1, K1'), so the
    # exponentially scaled kve is used throughout.
    j = jv(1, u)
    jp = jvp(1, u)
    kk = kve(1, w)
    kp = kvp(1, w) * np.exp(w)
    t1 = jp * w * kk + kp * u * j
    t2 = n1**2 * jp * w * kk + n2**2 * kp * u * j
    geom = (1.0 / u**2 + 1.0 / w**2) ** 2 * (u * w * j * kk) ** 2
    return (t1 * t2 - neff**2 * geom) / u**2


def dispersion_function(fiber: FiberSpec, omega: float, beta):
    """Pole-free HE/EH characteristic function; zero at every hybrid l = 1 root."""
    k = omega / C
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    beta = np.asarray(beta, dtype=float)
    a = fiber.radius
    u = a * np.sqrt(n1**2 * k**2 - beta**2)
    w = a * np.sqrt(beta**2 - n2**2 * k**2)
    return _dispersion_uw(u, w, n1, n2, beta / k)


def _beta_bracket(fiber, omega):
    k = omega / C
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    if not n1 > n2:
        raise NoGuidedMode(f"core index {n1:g} does not exceed cladding index {n2:g}")
    return n2 * k * (1.0 + BRACKET_MARGIN), n1 * k * (1.0 - BRACKET_MARGIN)


@lru_cache(maxsize=4096)
def solve_propagation_constant(fiber: FiberSpec, omega: float) -> float:
    """Propagation constant of HE11 at angular frequency ``omega``.

    The bracket (n2 k, n1 k), shrunk by 1e-9 at both ends, is mapped to the
    core parameter U and scanned at 512 uniform points; uniform U spacing keeps
    the lowest roots resolved even for highly multimode cores.  The smallest-U
    sign change (largest effective index) is refined to machine precision.

    Raises
    ------
    NoGuidedMode
        No sign change in the bracket.
    NonConvergence
        Root refinement ran out of iterations.
    """
    beta_lo, beta_hi = _beta_bracket(fiber, omega)
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    k = omega / C
    a = fiber.radius
    vv = (k * a) ** 2 * (n1**2 - n2**2)
    u_lo = _transverse(fiber, omega, beta_hi)[0]
    u_hi = _transverse(fiber, omega, beta_lo)[0]

    def g(u):
        u = np.asarray(u, dtype=float)
        w = np.sqrt(np.maximum(vv - u**2, 0.0))
        beta = np.sqrt(n1**2 * k**2 - (u / a) ** 2)
        return _dispersion_uw(u, w, n1, n2, beta / k)

    grid = np.linspace(u_lo, u_hi, SCAN_POINTS)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        # degenerate brackets produce non-finite samples; they are masked below
        vals = g(grid)
    finite = np.isfinite(vals)
    sign_change = np.nonzero(finite[:-1] & finite[1:] & (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))[0]
    if sign_change.size == 0:
        raise NoGuidedMode(
            f"no HE11 root for D={fiber.diameter:g} m at omega={omega:g} rad/s "
            "(mode too weakly guided to resolve inside the bracket)")
    i = sign_change[0]
    u_root = find_root_bracketed(lambda u: float(g(u)), grid[i], grid[i + 1], rtol=1e-15)
    return math.sqrt(n1**2 * k**2 - (u_root / a) ** 2)


def group_velocity(fiber: FiberSpec, omega: float, rel_step: float = 1e-3) -> float:
    """u = d(omega)/d(beta) from a Richardson-extrapolated central difference.

    Material dispersion enters only through a callable ``core_index``.
    """
    dbeta = differentiate_central(lambda om: solve_propagation_constant(fiber, om),
                                  omega, rel_step * omega)
    return 1.0 / dbeta


# -- field profile -----------------------------------------------------------

def _mode_constants(fiber, omega, beta):
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    k = omega / C
    if not (n2 * k < beta < n1 * k):
        raise InvalidEigenvalue(
            f"beta={beta:g} outside the guided range ({n2 * k:g}, {n1 * k:g})")
    u, w = _transverse(fiber, omega, beta)
    a = fiber.radius
    h = u / a
    q = w / a
    j1 = jv(1, u)
    s = (1.0 / u**2 + 1.0 / w**2) / (jvp(1, u) / (u * j1) + kvp(1, w) * np.exp(w) / (w * kve(1, w)))
    return a, h, q, u, w, s, j1


def _radial_profile(fiber, omega, beta, r, side=None):
    """Real radial functions (R_r, R_phi, R_z) of the unnormalized mode.

    ``side="core"`` or ``"cladding"`` forces one closed form regardless of r,
    which lets the boundary conditions be checked at r = a exactly.
    """
    a, h, q, u, w, s, j1 = _mode_constants(fiber, omega, beta)
    r = np.asarray(r, dtype=float)
    rr = np.atleast_1d(r)
    rad_r = np.empty_like(rr)
    rad_p = np.empty_like(rr)
    rad_z = np.empty_like(rr)
    if side is None:
        inside = rr < a
    elif side in ("core", "cladding"):
        inside = np.full(rr.shape, side == "core")
    else:
        raise ValueError(f"side must be 'core' or 'cladding', got {side!r}")
    ri = rr[inside]
    j0, j2 = jv(0, h * ri), jv(2, h * ri)
    rad_r[inside] = beta / (2 * h) * ((1 - s) * j0 - (1 + s) * j2)
    rad_p[inside] = beta / (2 * h) * ((1 - s) * j0 + (1 + s) * j2)
    rad_z[inside] = jv(1, h * ri)
    ro = rr[~inside]
    # K_n(q r) / K_1(q a) with the exponential factored out
    ratio = j1 / kve(1, w) * np.exp(-q * (ro - a))
    k0, k1, k2 = kve(0, q * ro), kve(1, q * ro), kve(2, q * ro)
    rad_r[~inside] = beta / (2 * q) * ratio * ((1 - s) * k0 + (1 + s) * k2)
    rad_p[~inside] = beta / (2 * q) * ratio * ((1 - s) * k0 - (1 + s) * k2)
    rad_z[~inside] = ratio * k1
    if r.ndim == 0:
        return rad_r[0], rad_p[0], rad_z[0]
    return rad_r, rad_p, rad_z


def mode_field(fiber: FiberSpec, omega: float, beta: float, r, phi, orientation: float = 0.0):
    """Unnormalized complex HE11 components (E_r, E_phi, E_z) at (r, phi).

    ``r`` and ``phi`` broadcast against each other.

    Raises
    ------
    InvalidEigenvalue
        If ``beta`` is outside (n2 k, n1 k).
    """
    r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
    rad_r, rad_p, rad_z = _radial_profile(fiber, omega, beta, r)
    cos = np.cos(phi - orientation)
    sin = np.sin(phi - orientation)
    root2 = math.sqrt(2.0)
    return (1j * root2 * rad_r * cos, -1j * root2 * rad_p * sin, root2 * rad_z * cos + 0j)


def boundary_mismatch(fiber: FiberSpec, omega: float, beta: float) -> dict[str, float]:
    """Relative jumps of the field components between the core and cladding
    closed forms evaluated at r = a.

    E_phi and E_z are tangential and must be continuous; E_r jumps by n1^2/n2^2
    (continuity of D_r), reported as ``"dr"`` relative to the displacement.
    """
    a = fiber.radius
    core = _radial_profile(fiber, omega, beta, a, side="core")
    clad = _radial_profile(fiber, omega, beta, a, side="cladding")
    n1, n2 = fiber.n_core(omega), fiber.cladding_index

    def rel(x, y):
        return abs(x - y) / max(abs(x), abs(y))

    return {"phi": rel(core[1], clad[1]), "z": rel(core[2], clad[2]),
            "dr": rel(n1**2 * core[0], n2**2 * clad[0])}


def _azimuthal_energy(fiber, omega, beta, r):
    # integral over phi of |E|^2 for the linear mode: 2*pi*(R_r^2 + R_phi^2 + R_z^2)
    rad_r, rad_p, rad_z = _radial_profile(fiber, omega, beta, r)
    return 2.0 * math.pi * (rad_r**2 + rad_p**2 + rad_z**2)


def evanescent_cutoff(fiber: FiberSpec, omega: float, beta: float, decay: float = 40.0) -> float:
    """Radius where the cladding field amplitude has dropped by ~exp(-decay)."""
    _, w = _transverse(fiber, omega, beta)
    return fiber.radius * (1.0 + decay / w)


def _energy_integrals(fiber, omega, beta, rtol=1e-12):
    """Cross-section integrals of n^2 |E|^2 inside and outside the core."""
    a = fiber.radius
    r_max = evanescent_cutoff(fiber, omega, beta)
    n1 = fiber.n_core(omega)
    n2 = fiber.cladding_index
    inner = integrate_adaptive(lambda r: n1**2 * _azimuthal_energy(fiber, omega, beta, r) * r,
                               (0.0, a), rtol).value
    outer = integrate_adaptive(lambda r: n2**2 * _azimuthal_energy(fiber, omega, beta, r) * r,
                               (a, r_max), rtol).value
    return float(inner), float(outer)


@dataclass(frozen=True)
class GuidedMode:
    """A solved, photon-normalized HE11 mode.

    ``norm_factor`` multiplies :func:`mode_field`; ``field_profile`` returns the
    normalized components in V/m.
    """

    fiber: FiberSpec
    omega: float
    beta: float
    norm_factor: float
    group_velocity: float
    orientation: float = 0.0
    energy_convention: str = DEFAULT_ENERGY_CONVENTION
    _outside_fraction: float = field(default=float("nan"), repr=False, compare=False)

    @property
    def effective_index(self) -> float:
        return self.beta * C / self.omega

    @property
    def phase_velocity(self) -> float:
        return self.omega / self.beta

    @property
    def energy_fraction_outside(self) -> float:
        """Share of the electric energy carried in the vacuum cladding."""
        return self._outside_fraction

    def field_profile(self, r, phi):
        e_r, e_p, e_z = mode_field(self.fiber, self.omega, self.beta, r, phi, self.orientation)
        n = self.norm_factor
        return n * e_r, n * e_p, n * e_z

    def intensity(self, r, phi):
        """|E|^2 of the normalized field, (V/m)^2."""
        r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
        rad_r, rad_p, rad_z = _radial_profile(self.fiber, self.omega, self.beta, r)
        c2 = np.cos(phi - self.orientation) ** 2
        return 2.0 * self.norm_factor**2 * ((rad_r**2 + rad_z**2) * c2 + rad_p**2 * (1.0 - c2))

    def azimuthal_mean_intensity(self, r):
        """|E|^2 averaged over phi at radius r."""
        rad_r, rad_p, rad_z = _radial_profile(self.fiber, self.omega, self.beta, r)
        return self.norm_factor**2 * (rad_r**2 + rad_p**2 + rad_z**2)

    def magnitude(self, r, phi):
        return np.sqrt(self.intensity(r, phi))

    @property
    def target_energy(self) -> float:
        return ENERGY_CONVENTIONS[self.energy_convention] * HBAR * self.omega


@lru_cache(maxsize=1024)
def normalize_mode(fiber: FiberSpec, omega: float, orientation: float = 0.0,
                   energy_convention: str = DEFAULT_ENERGY_CONVENTION) -> GuidedMode:
    """Solve and photon-normalize HE11 at ``omega``.

    The scale N is fixed by

        (eps0/2) * L * integral n(r)^2 |N E(r, phi)|^2 dA = f * hbar * omega

    where f is 1 for ``"hbar_omega"`` and 1/2 for ``"half_hbar_omega"``.
    """
    if energy_convention not in ENERGY_CONVENTIONS:
        raise ValueError(f"unknown energy convention {energy_convention!r}; "
                         f"expected one of {sorted(ENERGY_CONVENTIONS)}")
    beta = solve_propagation_constant(fiber, omega)
    inner, outer = _energy_integrals(fiber, omega, beta)
    target = ENERGY_CONVENTIONS[energy_convention] * HBAR * omega
    norm = math.sqrt(target / (0.5 * EPS0 * fiber.length * (inner + outer)))
    u = group_velocity(fiber, omega)
    return GuidedMode(fiber, omega, beta, norm, u, orientation, energy_convention,
                      outer / (inner + outer))


def electric_energy(mode: GuidedMode, rtol: float = 1e-10) -> float:
    """Recompute (eps0/2) L * integral n^2 |E|^2 dA from ``field_profile`` on a 2-D grid
    of (r, phi), independent of the analytic azimuthal reduction."""
    fiber = mode.fiber
    a = fiber.radius
    n1 = fiber.n_core(mode.omega)
    n2 = fiber.cladding_index
    r_max = evanescent_cutoff(fiber, mode.omega, mode.beta)

    def dens(n):
        def f(r, phi):
            e_r, e_p, e_z = mode.field_profile(r, phi)
            return n**2 * (abs(e_r) ** 2 + abs(e_p) ** 2 + abs(e_z) ** 2) * r
        return f

    inner = integrate_adaptive(dens(n1), ((0.0, a), (0.0, 2 * math.pi)), rtol).value
    outer = integrate_adaptive(dens(n2), ((a, r_max), (0.0, 2 * math.pi)), rtol).value
    return 0.5 * EPS0 * fiber.length * float(inner + outer)
