"""Shared benchmark configuration: 350 nm waist, degenerate 778 nm pair, Rb-like ladder."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import pytest

from entangled_tpa.constants import wavelength_span_to_omega, wavelength_to_omega
from entangled_tpa.engine import AtomicLadder, PhotonPairSpec, VaporSpec
from entangled_tpa.fiber import FiberSpec, GuidedMode, normalize_mode


@dataclass(frozen=True)
class Bench:
    wavelength: float
    omega: float
    delta: float
    sigma: float
    fiber: FiberSpec
    atom: AtomicLadder
    mode: GuidedMode
    vapor: VaporSpec

    def entangled(self, sigma=None):
        return PhotonPairSpec(self.omega, self.omega, self.sigma if sigma is None else sigma,
                              "entangled")

    @property
    def mono(self):
        return PhotonPairSpec(self.omega, self.omega, 0.0, "monochromatic")

    def atom_at(self, delta, **kw):
        """Same ladder with the intermediate level placed ``delta`` below the photons."""
        base = dict(d1=self.atom.d1, d2=self.atom.d2, gamma1=self.atom.gamma1,
                    gamma2=self.atom.gamma2)
        base.update(kw)
        w1 = self.omega - delta
        return AtomicLadder(w1, 2 * self.omega - w1, **base)


@lru_cache(maxsize=None)
def make_bench(length: float = 5e-3, energy_convention: str = "hbar_omega") -> Bench:
    lam = 778e-9
    omega = wavelength_to_omega(lam)
    delta = wavelength_span_to_omega(2.1e-9, lam)
    sigma = wavelength_span_to_omega(1e-9, lam)
    fiber = FiberSpec(350e-9, length)
    atom = AtomicLadder.from_radii(omega - delta, omega + delta, 0.223e-9, 0.0492e-9, 1e9, 1e9)
    mode = normalize_mode(fiber, omega, 0.0, energy_convention)
    return Bench(lam, omega, delta, sigma, fiber, atom, mode, VaporSpec(1e18))


@pytest.fixture(scope="session")
def bench() -> Bench:
    return make_bench()
