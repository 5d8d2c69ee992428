"""Two-photon absorption rates for entangled and monochromatic photon pairs.

Conventions
-----------
* Detunings are measured from the intermediate resonance: delta = omega_s - omega1
  for a monochromatic pair, Delta = omega_s0 - omega1 for the mean signal
  frequency of an entangled pair.
* ``m1``/``m2`` are the coupling matrix elements of the ladder Hamiltonian;
  their conjugates carry the propagation phase, m* = -d |E| exp(i beta z).
* The idler-first absorption path is neglected; it is suppressed by
  |omega_s - omega_i| << |omega_i - omega1|.
* Field magnitudes come from photon-normalized :class:`~entangled_tpa.fiber.GuidedMode`
  objects, so every rate here is per photon pair in the quantization length.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

import numpy as np

from ._accel import USE_NUMBA
from .constants import E_CHARGE, HBAR
from .errors import AspectRatioViolation, GridTooCoarse, PointInsideCore
from .fiber import (DEFAULT_CORE_INDEX, DEFAULT_ENERGY_CONVENTION, FiberSpec, GuidedMode,
                    evanescent_cutoff, normalize_mode)
from .numerics import integrate_adaptive, scaled_erfi_minus_i
from .numerics._kernels import gaussian_detuning_sum

SQRT_PI = math.sqrt(math.pi)
RESONANCE_RTOL = 1e-9
TOROID_MAX_ASPECT = 0.1
#: Exterior integrals stop where |E_s E_i|^2 has fallen to this fraction of its surface value.
EXTERIOR_CUTOFF = 1e-12


class PairKind(str, Enum):
    ENTANGLED = "entangled"
    MONOCHROMATIC = "monochromatic"


@dataclass(frozen=True)
class AtomicLadder:
    """Ladder g -> i -> h with orientation-averaged scalar dipoles."""

    omega1: float
    omega2: float
    d1: float
    d2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        for name in ("omega1", "omega2", "d1", "d2", "gamma1", "gamma2"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"AtomicLadder.{name} must be positive, got {value!r}")

    @classmethod
    def from_radii(cls, omega1, omega2, r1, r2, gamma1, gamma2):
        """Dipoles given as charge times displacement, d = e r."""
        return cls(omega1, omega2, r1 * E_CHARGE, r2 * E_CHARGE, gamma1, gamma2)

    def scaled(self, d1_factor: float = 1.0, d2_factor: float = 1.0) -> "AtomicLadder":
        return AtomicLadder(self.omega1, self.omega2, self.d1 * d1_factor, self.d2 * d2_factor,
                            self.gamma1, self.gamma2)


@dataclass(frozen=True)
class PhotonPairSpec:
    omega_s0: float
    omega_i0: float
    sigma: float = 0.0
    kind: PairKind = PairKind.ENTANGLED

    def __post_init__(self):
        object.__setattr__(self, "kind", PairKind(self.kind))
        if self.kind is PairKind.ENTANGLED and not self.sigma > 0:
            raise ValueError("an entangled pair needs a positive bandwidth sigma")

    def check_resonance(self, atom: AtomicLadder) -> None:
        total = atom.omega1 + atom.omega2
        if abs(self.omega_s0 + self.omega_i0 - total) > RESONANCE_RTOL * total:
            raise ValueError(
                f"pair frequency sum {self.omega_s0 + self.omega_i0:.12g} misses the two-photon "
                f"resonance {total:.12g} by more than {RESONANCE_RTOL:g} relative")


@dataclass(frozen=True)
class VaporSpec:
    density: float  # atoms per m^3

    def __post_init__(self):
        if not self.density >= 0:
            raise ValueError(f"vapor density must be non-negative, got {self.density!r}")


@dataclass(frozen=True)
class ToroidSpec:
    principal_diameter: float
    minor_diameter: float

    def __post_init__(self):
        if not (self.principal_diameter > 0 and self.minor_diameter > 0):
            raise ValueError("toroid diameters must be positive")
        aspect = self.minor_diameter / self.principal_diameter
        if aspect >= TOROID_MAX_ASPECT:
            raise AspectRatioViolation(
                f"minor/principal diameter ratio {aspect:.3g} is not below {TOROID_MAX_ASPECT}")

    @property
    def circumference(self) -> float:
        return math.pi * self.principal_diameter


@dataclass(frozen=True)
class TpaReport:
    kind: str
    rate_R2: float
    per_atom_rate_map: tuple = ()
    amplitude_diagnostics: dict = field(default_factory=dict)
    inputs_echo: dict = field(default_factory=dict)
    enhancement_factor: float | None = None
    rate_ratio_factor: float | None = None
    separation_s: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# -- detunings and small closed forms ---------------------------------------------

def mean_detuning(pair: PhotonPairSpec, atom: AtomicLadder) -> float:
    return pair.omega_s0 - atom.omega1


def erfi_argument(detuning: float, gamma1: float, sigma: float) -> complex:
    """(2 Delta + i Gamma1) / (2 sqrt(2) sigma)."""
    return (2.0 * detuning + 1j * gamma1) / (2.0 * math.sqrt(2.0) * sigma)


def pair_separation(u: float, sigma: float) -> float:
    """Gaussian half-width s = u / (sqrt(2) sigma) of the signal-idler separation."""
    return u / (math.sqrt(2.0) * sigma)


def coincidence_profile(z_separation, u: float, sigma: float):
    """Relative signal-idler coincidence density, 1 at zero separation."""
    dz = np.asarray(z_separation, dtype=float)
    out = np.exp(-(sigma * dz / u) ** 2)
    return float(out) if out.ndim == 0 else out


def enhancement_factor(fiber: FiberSpec, u: float, sigma: float) -> float:
    """L / s = sqrt(2) L sigma / u: fiber length over the pair separation."""
    return math.sqrt(2.0) * fiber.length * sigma / u


def rate_ratio_factor(fiber: FiberSpec, u: float, sigma: float) -> float:
    """L sigma / (u sqrt(pi)): large-detuning ratio of entangled to monochromatic rates."""
    return fiber.length * sigma / (u * SQRT_PI)


# -- per-atom amplitudes --------------------------------------------------------

def matrix_elements(mode_s: GuidedMode, mode_i: GuidedMode, atom: AtomicLadder, r, phi, z):
    """Coupling elements with m1* = -d1 |E_s| e^{i beta_s z} and m2* = -d2 |E_i| e^{i beta_i z}.

    Raises
    ------
    PointInsideCore
        For r below the fiber radius.
    """
    a = mode_s.fiber.radius
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < a):
        raise PointInsideCore(f"r={np.min(r_arr):g} m lies inside the core (radius {a:g} m)")
    m1 = -np.exp(-1j * mode_s.beta * np.asarray(z)) * atom.d1 * mode_s.magnitude(r, phi)
    m2 = -np.exp(-1j * mode_i.beta * np.asarray(z)) * atom.d2 * mode_i.magnitude(r, phi)
    if np.ndim(m1) == 0:
        return complex(m1), complex(m2)
    return m1, m2


def amplitude_monochromatic(m1, m2, delta: float, atom: AtomicLadder):
    """Steady-state upper-level amplitude -4i m1* m2* / (hbar^2 (2 delta + i Gamma1) Gamma2)."""
    return -4j * np.conj(m1) * np.conj(m2) / (
        HBAR**2 * (2.0 * delta + 1j * atom.gamma1) * atom.gamma2)


def _velocity(mode: GuidedMode, velocity: str) -> float:
    if velocity == "group":
        return mode.group_velocity
    if velocity == "phase":
        return mode.phase_velocity
    raise ValueError(f"velocity must be 'group' or 'phase', got {velocity!r}")


def _pair_geometry(mode_s0, mode_i0, atom, r, phi, z):
    m1, m2 = matrix_elements(mode_s0, mode_i0, atom, r, phi, z)
    # m1* m2* = e^{i(beta_s + beta_i) z} d1 d2 |E_s| |E_i|
    return np.conj(m1) * np.conj(m2)


def amplitude_entangled_continuum(mode_s0: GuidedMode, mode_i0: GuidedMode, atom: AtomicLadder,
                                  pair: PhotonPairSpec, fiber: FiberSpec, r, phi, z=0.0,
                                  *, u: float | None = None, velocity: str = "group"):
    """Continuum-limit amplitude A1 for a Gaussian frequency-entangled pair.

    Uses exp(-zeta^2) (Erfi(zeta) - i) as a single stable quantity, with
    zeta = (2 Delta + i Gamma1) / (2 sqrt(2) sigma).

    Raises
    ------
    AccuracyDomainExceeded
        If |zeta| > 50.
    """
    if u is None:
        u = _velocity(mode_s0, velocity)
    delta = mean_detuning(pair, atom)
    zeta = erfi_argument(delta, atom.gamma1, pair.sigma)
    kernel = scaled_erfi_minus_i(zeta)
    prefactor = math.sqrt(2.0 * SQRT_PI * fiber.length / (pair.sigma * u))
    out = -1j * _pair_geometry(mode_s0, mode_i0, atom, r, phi, z) * prefactor * kernel / (
        HBAR**2 * atom.gamma2)
    return complex(out) if np.ndim(out) == 0 else out


def default_detuning_grid(pair: PhotonPairSpec, atom: AtomicLadder, span: float = 8.0,
                          min_points: int = 2**15) -> np.ndarray:
    """Uniform nu grid over [-span sigma, span sigma] fine enough to resolve the
    intermediate-state pole (spacing <= Gamma1/8) and the Gaussian (<= sigma/64)."""
    width = 2.0 * span * pair.sigma
    spacing = min(atom.gamma1 / 8.0, pair.sigma / 64.0)
    n = max(min_points, 1 << int(math.ceil(math.log2(width / spacing))))
    return np.linspace(-span * pair.sigma, span * pair.sigma, n + 1)


def _detuning_sum(nu, weights, sigma, delta, gamma1, use_numba):
    if use_numba:
        return gaussian_detuning_sum(nu, weights, sigma, 2.0 * delta, gamma1)
    return complex(np.sum(weights * np.exp(-nu**2 / (2.0 * sigma**2))
                          / (2.0 * delta + 2.0 * nu + 1j * gamma1)))


def amplitude_entangled_discrete(mode_s0: GuidedMode, mode_i0: GuidedMode, atom: AtomicLadder,
                                 pair: PhotonPairSpec, fiber: FiberSpec, r, phi, z=0.0,
                                 nu=None, weights=None, *, span: float = 8.0,
                                 tol: float | None = None, u: float | None = None,
                                 velocity: str = "group", use_numba: bool | None = None):
    """Entangled amplitude as an explicit sum over frequency offsets nu.

    Each grid sample stands for ``L/(2 pi u) * weight`` cavity modes and carries
    the continuum normalization N = sqrt(2 sqrt(pi) u / (L sigma)).  With no
    ``weights`` the grid must be uniform and gets trapezoid weights.

    If ``tol`` is given the sum is repeated on the grid with midpoints inserted;
    a change larger than ``10 * tol`` (relative) raises :class:`GridTooCoarse`.
    """
    if u is None:
        u = _velocity(mode_s0, velocity)
    use_numba = USE_NUMBA if use_numba is None else use_numba
    delta = mean_detuning(pair, atom)
    sigma = pair.sigma
    if nu is None:
        nu = default_detuning_grid(pair, atom, span)
    nu = np.ascontiguousarray(nu, dtype=float)
    if weights is None:
        weights = _trapezoid_weights(nu)
    weights = np.ascontiguousarray(weights, dtype=float)

    def evaluate(grid, wts):
        total = _detuning_sum(grid, wts, sigma, delta, atom.gamma1, use_numba)
        norm = math.sqrt(2.0 * SQRT_PI * u / (fiber.length * sigma))
        return -4j * norm * fiber.length / (2.0 * math.pi * u) * total / (HBAR**2 * atom.gamma2)

    core = evaluate(nu, weights)
    if tol is not None:
        fine = np.empty(2 * nu.size - 1)
        fine[0::2] = nu
        fine[1::2] = 0.5 * (nu[1:] + nu[:-1])
        refined = evaluate(fine, _trapezoid_weights(fine))
        change = abs(refined - core)
        if change > 10.0 * tol * abs(refined):
            raise GridTooCoarse(
                f"doubling the nu grid ({nu.size} points) changed A1 by {change / abs(refined):.3g} "
                f"relative, above 10 x tol = {10 * tol:.3g}")
    out = _pair_geometry(mode_s0, mode_i0, atom, r, phi, z) * core
    return complex(out) if np.ndim(out) == 0 else out


def _trapezoid_weights(nu: np.ndarray) -> np.ndarray:
    if nu.size == 1:
        raise ValueError("a single-point grid needs explicit weights")
    steps = np.diff(nu)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("trapezoid weights need a uniform grid; pass weights explicitly")
    w = np.full(nu.size, steps[0])
    w[0] = w[-1] = 0.5 * steps[0]
    return w


def rate_per_atom(amplitude, atom: AtomicLadder):
    """Steady-state two-photon absorption rate |A1|^2 Gamma2 of one atom."""
    out = np.abs(amplitude) ** 2 * atom.gamma2
    return float(out) if np.ndim(out) == 0 else out


# -- volume integrals and total rates ---------------------------------------------

@lru_cache(maxsize=256)
def exterior_intensity_integral(mode_s: GuidedMode, mode_i: GuidedMode,
                                azimuth: str = "full", rtol: float = 1e-10) -> float:
    """Cross-section integral of |E_s|^2 |E_i|^2 over the vacuum outside the core, m^-2 V^4.

    ``azimuth="full"`` integrates the anisotropic HE11 intensity over phi;
    ``"averaged"`` uses phi-averaged intensities.  The outer radius starts at
    5 D and doubles until the integrand is below 1e-12 of its surface value.
    """
    a = mode_s.fiber.radius
    r_max = max(5.0 * mode_s.fiber.diameter, a * 1.01)

    if azimuth == "full":
        def profile(r):
            phis = np.linspace(0.0, 2.0 * math.pi, 33)
            return np.max(mode_s.intensity(r, phis) * mode_i.intensity(r, phis))
    elif azimuth == "averaged":
        def profile(r):
            return float(mode_s.azimuthal_mean_intensity(r) * mode_i.azimuthal_mean_intensity(r))
    else:
        raise ValueError(f"azimuth must be 'full' or 'averaged', got {azimuth!r}")

    surface = profile(a)
    while profile(r_max) > EXTERIOR_CUTOFF * surface:
        r_max = a + 2.0 * (r_max - a)

    if azimuth == "full":
        res = integrate_adaptive(lambda r, p: mode_s.intensity(r, p) * mode_i.intensity(r, p) * r,
                                 ((a, r_max), (0.0, 2.0 * math.pi)), rtol)
    else:
        res = integrate_adaptive(lambda r: 2.0 * math.pi * mode_s.azimuthal_mean_intensity(r)
                                 * mode_i.azimuthal_mean_intensity(r) * r, (a, r_max), rtol)
    return float(res.value)


def monochromatic_kernel(atom: AtomicLadder, delta: float) -> float:
    """Per-atom monochromatic rate divided by |E_s|^2 |E_i|^2."""
    return 16.0 * (atom.d1 * atom.d2) ** 2 / (
        HBAR**4 * (4.0 * delta**2 + atom.gamma1**2) * atom.gamma2)


def entangled_kernel(atom: AtomicLadder, delta: float, sigma: float, length: float,
                     u: float) -> float:
    """Per-atom entangled rate divided by |E_s0|^2 |E_i0|^2."""
    scaled = scaled_erfi_minus_i(erfi_argument(delta, atom.gamma1, sigma))
    return (2.0 * SQRT_PI * length / (sigma * u)) * abs(scaled) ** 2 * (atom.d1 * atom.d2) ** 2 / (
        HBAR**4 * atom.gamma2)


def _check_modes(mode_s0, mode_i0, fiber):
    for mode in (mode_s0, mode_i0):
        if not math.isclose(mode.fiber.length, fiber.length, rel_tol=1e-12):
            raise ValueError("modes must be normalized with the fiber's quantization length")


def _rate_map(mode_s0, mode_i0, atom, amplitude_fn):
    a = mode_s0.fiber.radius
    rows = []
    for r_factor in (1.0, 1.5, 2.0, 3.0):
        for phi in (0.0, math.pi / 4, math.pi / 2):
            amp = amplitude_fn(a * r_factor, phi)
            rows.append((a * r_factor, phi, rate_per_atom(amp, atom)))
    return tuple(rows)


def _echo(**items) -> dict:
    out = {}
    for key, value in items.items():
        if hasattr(value, "__dataclass_fields__"):
            value = {k: (v.value if isinstance(v, Enum) else v) for k, v in asdict(value).items()
                     if not callable(v)}
        out[key] = value
    return out


def total_rate(mode_s0: GuidedMode, mode_i0: GuidedMode, atom: AtomicLadder,
               pair: PhotonPairSpec, fiber: FiberSpec, vapor: VaporSpec, *,
               azimuth: str = "full", velocity: str = "group") -> TpaReport:
    """Vapor-integrated TPA rate around the fiber waist.

    The z integral is analytic (|E| does not depend on z) and contributes L;
    the cross-section integral runs over the vacuum outside the core.
    """
    _check_modes(mode_s0, mode_i0, fiber)
    pair.check_resonance(atom)
    delta = mean_detuning(pair, atom)
    area_integral = exterior_intensity_integral(mode_s0, mode_i0, azimuth)
    u = _velocity(mode_s0, velocity)
    a = fiber.radius
    echo = _echo(atom=atom, pair=pair, fiber=fiber, vapor=vapor)
    echo["azimuth"] = azimuth
    echo["velocity"] = velocity
    echo["energy_convention"] = mode_s0.energy_convention
    diagnostics = {
        "beta_s0": mode_s0.beta,
        "beta_i0": mode_i0.beta,
        "group_velocity": mode_s0.group_velocity,
        "phase_velocity": mode_s0.phase_velocity,
        "velocity_used": u,
        "exterior_intensity_integral": area_integral,
        "mean_detuning": delta,
        "energy_fraction_outside": mode_s0.energy_fraction_outside,
    }
    if pair.kind is PairKind.MONOCHROMATIC:
        kernel = monochromatic_kernel(atom, delta)

        def amp(r, phi):
            m1, m2 = matrix_elements(mode_s0, mode_i0, atom, r, phi, 0.0)
            return amplitude_monochromatic(m1, m2, delta, atom)

        return TpaReport(
            kind=pair.kind.value,
            rate_R2=kernel * vapor.density * fiber.length * area_integral,
            per_atom_rate_map=_rate_map(mode_s0, mode_i0, atom, amp),
            amplitude_diagnostics={"alpha1_at_surface": complex(amp(a, 0.0))},
            inputs_echo=echo,
            diagnostics=diagnostics,
        )

    kernel = entangled_kernel(atom, delta, pair.sigma, fiber.length, u)

    def amp(r, phi):
        return amplitude_entangled_continuum(mode_s0, mode_i0, atom, pair, fiber, r, phi, 0.0, u=u)

    diagnostics["erfi_argument"] = erfi_argument(delta, atom.gamma1, pair.sigma)
    return TpaReport(
        kind=pair.kind.value,
        rate_R2=kernel * vapor.density * fiber.length * area_integral,
        per_atom_rate_map=_rate_map(mode_s0, mode_i0, atom, amp),
        amplitude_diagnostics={"A1_at_surface": complex(amp(a, 0.0))},
        inputs_echo=echo,
        enhancement_factor=enhancement_factor(fiber, u, pair.sigma),
        rate_ratio_factor=rate_ratio_factor(fiber, u, pair.sigma),
        separation_s=pair_separation(u, pair.sigma),
        diagnostics=diagnostics,
    )


def rate_asymptotic(mode_s0: GuidedMode, mode_i0: GuidedMode, atom: AtomicLadder,
                    pair: PhotonPairSpec, fiber: FiberSpec, vapor: VaporSpec, *,
                    azimuth: str = "full", velocity: str = "group") -> float:
    """Large-detuning (sigma << Delta) limit of the entangled total rate.

    Obtained from the full expression with Erfi(z) ~ exp(z^2)/(sqrt(pi) z);
    the leading coefficient is 16 L sigma / (u sqrt(pi)), which makes the ratio
    to the monochromatic rate exactly L sigma / (u sqrt(pi)).
    """
    _check_modes(mode_s0, mode_i0, fiber)
    delta = mean_detuning(pair, atom)
    u = _velocity(mode_s0, velocity)
    area_integral = exterior_intensity_integral(mode_s0, mode_i0, azimuth)
    coeff = 16.0 * fiber.length / (u * SQRT_PI)
    return (coeff * (atom.d1 * atom.d2) ** 2 * pair.sigma
            / (HBAR**4 * (4.0 * delta**2 + atom.gamma1**2) * atom.gamma2)
            * vapor.density * fiber.length * area_integral)


def microtoroid_rate(toroid: ToroidSpec, atom: AtomicLadder, vapor: VaporSpec, wavelength: float,
                     *, core_index=DEFAULT_CORE_INDEX,
                     energy_convention: str = DEFAULT_ENERGY_CONVENTION,
                     azimuth: str = "full") -> TpaReport:
    """Monochromatic TPA rate in a thin microtoroid (bent-fiber approximation).

    The ring cross-section is treated as a straight fiber of the minor
    diameter; each of the two counter-propagating photons holds one photon per
    circumference.  No cavity build-up or standing-wave interference is
    included.
    """
    from .constants import wavelength_to_omega

    omega = wavelength_to_omega(wavelength)
    ring = FiberSpec(toroid.minor_diameter, toroid.circumference, core_index)
    mode = normalize_mode(ring, omega, 0.0, energy_convention)
    delta = omega - atom.omega1
    area_integral = exterior_intensity_integral(mode, mode, azimuth)
    kernel = monochromatic_kernel(atom, delta)
    rate = kernel * vapor.density * toroid.circumference * area_integral
    echo = _echo(atom=atom, vapor=vapor, toroid=toroid)
    echo.update(wavelength=wavelength, core_index=core_index,
                energy_convention=energy_convention, azimuth=azimuth)

    def amp(r, phi):
        m1, m2 = matrix_elements(mode, mode, atom, r, phi, 0.0)
        return amplitude_monochromatic(m1, m2, delta, atom)

    return TpaReport(
        kind="toroid",
        rate_R2=rate,
        per_atom_rate_map=_rate_map(mode, mode, atom, amp),
        amplitude_diagnostics={"alpha1_at_surface": complex(amp(ring.radius, 0.0))},
        inputs_echo=echo,
        diagnostics={"circumference": toroid.circumference, "beta": mode.beta,
                     "exterior_intensity_integral": area_integral, "detuning": delta},
    )
