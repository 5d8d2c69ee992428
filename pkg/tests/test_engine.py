import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_bench
from entangled_tpa import engine as E
from entangled_tpa.constants import HBAR
from entangled_tpa.errors import AspectRatioViolation, GridTooCoarse, PointInsideCore
from entangled_tpa.fiber import normalize_mode


def rel(a, b):
    return abs(a - b) / abs(b)


# -- domain types -----------------------------------------------------------------

def test_ladder_requires_positive_fields():
    with pytest.raises(ValueError):
        E.AtomicLadder(1.0, 1.0, 0.0, 1.0, 1.0, 1.0)


def test_resonance_check(bench):
    bench.entangled().check_resonance(bench.atom)
    off = E.PhotonPairSpec(bench.omega, bench.omega * (1 + 1e-8), bench.sigma)
    with pytest.raises(ValueError):
        off.check_resonance(bench.atom)


def test_entangled_pair_needs_bandwidth(bench):
    with pytest.raises(ValueError):
        E.PhotonPairSpec(bench.omega, bench.omega, 0.0, "entangled")


def test_toroid_aspect_guard():
    E.ToroidSpec(19e-6, 350e-9)
    with pytest.raises(AspectRatioViolation):
        E.ToroidSpec(3e-6, 350e-9)


def test_vapor_density_non_negative():
    with pytest.raises(ValueError):
        E.VaporSpec(-1.0)


# -- matrix elements ----------------------------------------------------------------

def test_zero_dipole_gives_zero_coupling(bench):
    atom = SimpleNamespace(d1=0.0, d2=bench.atom.d2)
    m1, m2 = E.matrix_elements(bench.mode, bench.mode, atom, bench.fiber.radius, 0.3, 1e-4)
    assert m1 == 0 and m2 != 0


def test_coupling_modulus_independent_of_z(bench):
    z = np.linspace(0, 5e-3, 7)
    m1, _ = E.matrix_elements(bench.mode, bench.mode, bench.atom, 1.2 * bench.fiber.radius, 0.5, z)
    assert np.allclose(np.abs(m1), abs(m1[0]), rtol=1e-14)


def test_coupling_matches_field_components(bench):
    r, phi = 1.4 * bench.fiber.radius, 0.9
    er, ep, ez = bench.mode.field_profile(r, phi)
    oracle = bench.atom.d1 * math.sqrt(abs(er) ** 2 + abs(ep) ** 2 + abs(ez) ** 2)
    m1, _ = E.matrix_elements(bench.mode, bench.mode, bench.atom, r, phi, 0.0)
    assert abs(m1) == pytest.approx(oracle, rel=1e-4)


def test_conjugate_carries_propagation_phase(bench):
    z = 1.234e-6
    m1, _ = E.matrix_elements(bench.mode, bench.mode, bench.atom, bench.fiber.radius, 0.0, z)
    assert np.angle(-np.conj(m1)) == pytest.approx(
        math.remainder(bench.mode.beta * z, 2 * math.pi), abs=1e-9)


def test_point_inside_core(bench):
    with pytest.raises(PointInsideCore):
        E.matrix_elements(bench.mode, bench.mode, bench.atom, 0.9 * bench.fiber.radius, 0, 0)


# -- monochromatic amplitude ------------------------------------------------------

def test_mono_zero_coupling(bench):
    assert E.amplitude_monochromatic(0.0, 1e-30, bench.delta, bench.atom) == 0


def test_mono_detuning_sign_symmetry(bench):
    m1, m2 = 2e-28 * np.exp(0.3j), 1e-28
    a = E.amplitude_monochromatic(m1, m2, bench.delta, bench.atom)
    b = E.amplitude_monochromatic(m1, m2, -bench.delta, bench.atom)
    assert abs(a) == pytest.approx(abs(b), rel=1e-15)


def test_mono_rate_formula(bench):
    m1, m2 = 2e-28, 3e-28
    a = E.amplitude_monochromatic(m1, m2, bench.delta, bench.atom)
    kernel = E.monochromatic_kernel(bench.atom, bench.delta)
    field = (m1 / bench.atom.d1) ** 2 * (m2 / bench.atom.d2) ** 2
    assert E.rate_per_atom(a, bench.atom) == pytest.approx(kernel * field, rel=1e-13)


# -- entangled amplitudes -----------------------------------------------------------

def _amps(bench, atom, pair, r=None, **kw):
    r = bench.fiber.radius if r is None else r
    c = E.amplitude_entangled_continuum(bench.mode, bench.mode, atom, pair, bench.fiber, r, 0.0)
    d = E.amplitude_entangled_discrete(bench.mode, bench.mode, atom, pair, bench.fiber, r, 0.0,
                                       **kw)
    return c, d


def test_continuum_modulus_independent_of_z(bench):
    p = bench.entangled()
    vals = [abs(E.amplitude_entangled_continuum(bench.mode, bench.mode, bench.atom, p, bench.fiber,
                                                bench.fiber.radius, 0.2, z))
            for z in (0.0, 1e-4, 3e-3)]
    assert np.allclose(vals, vals[0], rtol=1e-14)


@pytest.mark.parametrize("ratio", [0.1, 0.5, 1.0, 2.0])
def test_continuum_matches_discrete(bench, ratio):
    pair = bench.entangled(ratio * bench.delta)
    c, d = _amps(bench, bench.atom, pair)
    assert rel(d, c) < 1e-5


def test_continuum_matches_discrete_on_resonance(bench):
    atom = bench.atom_at(0.0)
    c, d = _amps(bench, atom, bench.entangled())
    assert rel(d, c) < 1e-5


def test_literal_2_15_grid_is_too_coarse(bench):
    # the pole at nu = -Delta sits Gamma1/2 from the real axis; 2^15 samples over
    # [-8 sigma, 8 sigma] are ~1.5 Gamma1 apart and cannot resolve it
    pair = bench.entangled()
    nu = np.linspace(-8 * pair.sigma, 8 * pair.sigma, 2**15)
    c, d = _amps(bench, bench.atom, pair, nu=nu)
    assert rel(d, c) > 1e-3
    with pytest.raises(GridTooCoarse):
        E.amplitude_entangled_discrete(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                                       bench.fiber.radius, 0.0, nu=nu, tol=1e-5)


def test_default_grid_passes_refinement_check(bench):
    pair = bench.entangled()
    E.amplitude_entangled_discrete(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                                   bench.fiber.radius, 0.0, tol=1e-6)


def test_single_point_grid_has_monochromatic_shape(bench):
    pair = bench.entangled()
    one = np.array([0.0])
    w = np.array([1.0])
    ratios = []
    for delta in (bench.delta, 0.5 * bench.delta, -2 * bench.delta):
        atom = bench.atom_at(delta)
        d = E.amplitude_entangled_discrete(bench.mode, bench.mode, atom, pair, bench.fiber,
                                           bench.fiber.radius, 0.0, nu=one, weights=w)
        m1, m2 = E.matrix_elements(bench.mode, bench.mode, atom, bench.fiber.radius, 0.0, 0.0)
        ratios.append(d / E.amplitude_monochromatic(m1, m2, delta, atom))
    assert np.allclose(ratios, ratios[0], rtol=1e-13)


def test_refinement_converges_monotonically(bench):
    pair = bench.entangled()
    atom = bench.atom_at(bench.delta, gamma1=pair.sigma / 64)
    span = 8 * pair.sigma
    diffs = []
    for k in range(10, 14):
        n = 2**k
        a1 = E.amplitude_entangled_discrete(bench.mode, bench.mode, atom, pair, bench.fiber,
                                            bench.fiber.radius, 0.0,
                                            nu=np.linspace(-span, span, n + 1))
        a2 = E.amplitude_entangled_discrete(bench.mode, bench.mode, atom, pair, bench.fiber,
                                            bench.fiber.radius, 0.0,
                                            nu=np.linspace(-span, span, 2 * n + 1))
        diffs.append(abs(a2 - a1))
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_numba_and_numpy_sums_agree(bench):
    pair = bench.entangled()
    kw = dict(nu=np.linspace(-8 * pair.sigma, 8 * pair.sigma, 2**16 + 1))
    a = E.amplitude_entangled_discrete(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                                       bench.fiber.radius, 0.0, use_numba=True, **kw)
    b = E.amplitude_entangled_discrete(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                                       bench.fiber.radius, 0.0, use_numba=False, **kw)
    assert rel(a, b) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(-3.0, 3.0).filter(lambda x: abs(x) > 0.05))
def test_continuum_discrete_property(sigma_ratio, delta_ratio):
    bench = make_bench()
    delta = delta_ratio * bench.delta
    pair = bench.entangled(sigma_ratio * abs(delta))
    c, d = _amps(bench, bench.atom_at(delta), pair)
    assert rel(d, c) < 1e-5


# -- per-atom rate ------------------------------------------------------------------

def test_rate_of_zero_amplitude(bench):
    assert E.rate_per_atom(0.0, bench.atom) == 0


def test_rate_scales_with_dipole_product(bench):
    pair = bench.entangled()
    a = E.amplitude_entangled_continuum(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                                        bench.fiber.radius, 0.0)
    scaled = bench.atom.scaled(2.0, 3.0)
    b = E.amplitude_entangled_continuum(bench.mode, bench.mode, scaled, pair, bench.fiber,
                                        bench.fiber.radius, 0.0)
    assert E.rate_per_atom(b, scaled) == pytest.approx(36 * E.rate_per_atom(a, bench.atom),
                                                       rel=1e-13)


def test_surface_rate_discrete_vs_continuum(bench):
    c, d = _amps(bench, bench.atom, bench.entangled())
    assert rel(E.rate_per_atom(d, bench.atom), E.rate_per_atom(c, bench.atom)) < 1e-5


# -- total rates ----------------------------------------------------------------------

def test_zero_density(bench):
    vapor = E.VaporSpec(0.0)
    for pair in (bench.entangled(), bench.mono):
        assert E.total_rate(bench.mode, bench.mode, bench.atom, pair, bench.fiber,
                            vapor).rate_R2 == 0


def test_mismatched_length_rejected(bench):
    other = make_bench(length=1e-3)
    with pytest.raises(ValueError):
        E.total_rate(other.mode, other.mode, bench.atom, bench.mono, bench.fiber, bench.vapor)


def test_entangled_rate_independent_of_length():
    a, b = make_bench(5e-3), make_bench(10e-3)
    ra = E.total_rate(a.mode, a.mode, a.atom, a.entangled(), a.fiber, a.vapor).rate_R2
    rb = E.total_rate(b.mode, b.mode, b.atom, b.entangled(), b.fiber, b.vapor).rate_R2
    assert rb == pytest.approx(ra, rel=1e-6)


def test_mono_rate_inverse_length():
    a, b = make_bench(5e-3), make_bench(10e-3)
    ra = E.total_rate(a.mode, a.mode, a.atom, a.mono, a.fiber, a.vapor).rate_R2
    rb = E.total_rate(b.mode, b.mode, b.atom, b.mono, b.fiber, b.vapor).rate_R2
    assert rb == pytest.approx(0.5 * ra, rel=1e-6)


def test_detuning_sign_symmetry(bench):
    rates = [E.total_rate(bench.mode, bench.mode, bench.atom_at(s * 6.54e12), bench.entangled(),
                          bench.fiber, bench.vapor).rate_R2 for s in (1, -1)]
    assert rates[1] == pytest.approx(rates[0], rel=1e-10)


def test_azimuthal_average_is_lower_bound(bench):
    full = E.exterior_intensity_integral(bench.mode, bench.mode, "full")
    avg = E.exterior_intensity_integral(bench.mode, bench.mode, "averaged")
    assert 0 < avg < full


def test_exterior_integral_converged(bench):
    loose = E.exterior_intensity_integral(bench.mode, bench.mode, "full", 1e-8)
    tight = E.exterior_intensity_integral(bench.mode, bench.mode, "full", 1e-11)
    assert loose == pytest.approx(tight, rel=1e-7)


def test_report_fields(bench):
    rep = E.total_rate(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                       bench.vapor)
    assert rep.rate_R2 > 0 and rep.enhancement_factor > 0 and rep.separation_s > 0
    assert len(rep.per_atom_rate_map) == 12
    assert rep.inputs_echo["fiber"]["diameter"] == bench.fiber.diameter


def test_rate_decreases_with_detuning_beyond_two_sigma(bench):
    deltas = np.linspace(2.05, 8.0, 25) * bench.sigma
    rates = [E.total_rate(bench.mode, bench.mode, bench.atom_at(d), bench.entangled(),
                          bench.fiber, bench.vapor).rate_R2 for d in deltas]
    assert np.all(np.diff(rates) < 0)


def test_bandwidth_curve_unimodal(bench):
    from entangled_tpa.scenario import count_local_maxima
    sigmas = np.linspace(0.1e12, 20e12, 80)
    rates = [E.total_rate(bench.mode, bench.mode, bench.atom, bench.entangled(s), bench.fiber,
                          bench.vapor).rate_R2 for s in sigmas]
    k = int(np.argmax(rates))
    assert count_local_maxima(rates) == 1 and 0 < k < len(rates) - 1


# -- asymptotic form and factors ----------------------------------------------------

def test_asymptotic_within_five_percent_at_ratio_ten(bench):
    pair = bench.entangled(bench.delta / 10)
    full = E.total_rate(bench.mode, bench.mode, bench.atom, pair, bench.fiber, bench.vapor).rate_R2
    asym = E.rate_asymptotic(bench.mode, bench.mode, bench.atom, pair, bench.fiber, bench.vapor)
    assert rel(asym, full) < 0.05


def test_asymptotic_linear_in_sigma(bench):
    a = E.rate_asymptotic(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                          bench.vapor)
    b = E.rate_asymptotic(bench.mode, bench.mode, bench.atom, bench.entangled(2 * bench.sigma),
                          bench.fiber, bench.vapor)
    assert b == pytest.approx(2 * a, rel=1e-14)


def test_asymptotic_ratio_to_mono(bench):
    asym = E.rate_asymptotic(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                             bench.vapor)
    mono = E.total_rate(bench.mode, bench.mode, bench.atom, bench.mono, bench.fiber,
                        bench.vapor).rate_R2
    factor = E.rate_ratio_factor(bench.fiber, bench.mode.group_velocity, bench.sigma)
    assert asym / mono == pytest.approx(factor, rel=1e-6)


def test_pair_separation_examples():
    assert E.pair_separation(2.63e8, 3.11e12) == pytest.approx(5.98e-5, rel=2e-3)
    assert E.pair_separation(2.63e8, 3.11e12) == pytest.approx(math.pi * 19e-6, rel=0.01)
    u, s = 2.2e8, 4.4e12
    assert E.pair_separation(u, s) * math.sqrt(2) * s / u == 1.0
    assert E.pair_separation(u, 1e300) < 1e-280


def test_coincidence_profile_examples():
    u, sigma = 2.27e8, 3.11e12
    s = E.pair_separation(u, sigma)
    assert E.coincidence_profile(0.0, u, sigma) == 1.0
    assert E.coincidence_profile(s, u, sigma) == pytest.approx(math.exp(-0.5), rel=1e-14)


def test_coincidence_profile_against_fourier_integral():
    u, sigma = 2.27e8, 3.11e12
    nu = np.linspace(-12 * sigma, 12 * sigma, 20001)
    env = np.exp(-nu**2 / (2 * sigma**2))
    seps = np.linspace(-3, 3, 20) * E.pair_separation(u, sigma)
    for dz in seps:
        integral = np.trapezoid(np.exp(1j * nu * dz / u) * env, nu)
        oracle = abs(integral) ** 2 / (2 * math.pi * sigma**2)
        assert E.coincidence_profile(dz, u, sigma) == pytest.approx(oracle, abs=1e-6)


def test_enhancement_factor_identities(bench):
    u, sigma = bench.mode.group_velocity, bench.sigma
    s = E.pair_separation(u, sigma)
    assert E.enhancement_factor(bench.fiber.with_length(s), u, sigma) == pytest.approx(1.0,
                                                                                       rel=1e-15)
    ratio = E.enhancement_factor(bench.fiber, u, sigma) / E.rate_ratio_factor(bench.fiber, u, sigma)
    assert ratio == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)


def test_benchmark_ratio_close_to_rate_ratio_form(bench):
    # the entangled/mono ratio at finite Delta/sigma is compared loosely with
    # the large-detuning factor L sigma / (u sqrt(pi)); reference ratio 1.45e6/2.7e4
    reference = 1.45e6 / 2.7e4
    factor = E.rate_ratio_factor(bench.fiber, bench.mode.group_velocity, bench.sigma)
    assert abs(factor / reference - 1) < 0.35


# -- microtoroid -----------------------------------------------------------------------

def test_toroid_zero_density(bench):
    rep = E.microtoroid_rate(E.ToroidSpec(19e-6, 350e-9), bench.atom, E.VaporSpec(0), 778e-9)
    assert rep.rate_R2 == 0


def test_toroid_inverse_circumference(bench):
    a = E.microtoroid_rate(E.ToroidSpec(19e-6, 350e-9), bench.atom, bench.vapor, 778e-9).rate_R2
    b = E.microtoroid_rate(E.ToroidSpec(38e-6, 350e-9), bench.atom, bench.vapor, 778e-9).rate_R2
    assert b == pytest.approx(0.5 * a, rel=1e-6)


def test_toroid_matches_fiber_of_circumference_length(bench):
    toroid = E.ToroidSpec(19e-6, 350e-9)
    rep = E.microtoroid_rate(toroid, bench.atom, bench.vapor, 778e-9)
    ring = bench.fiber.with_length(toroid.circumference)
    mode = normalize_mode(ring, bench.omega)
    fiber_rate = E.total_rate(mode, mode, bench.atom, bench.mono, ring, bench.vapor).rate_R2
    assert rep.rate_R2 == pytest.approx(fiber_rate, rel=1e-12)


def test_velocity_model_switch(bench):
    group = E.total_rate(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                         bench.vapor, velocity="group")
    phase = E.total_rate(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                         bench.vapor, velocity="phase")
    assert phase.rate_R2 < group.rate_R2
    with pytest.raises(ValueError):
        E.total_rate(bench.mode, bench.mode, bench.atom, bench.entangled(), bench.fiber,
                     bench.vapor, velocity="signal")


def test_mono_closed_form_is_perturbative(bench):
    m1, _ = E.matrix_elements(bench.mode, bench.mode, bench.atom, bench.fiber.radius, 0.0, 0.0)
    # intermediate amplitude 2|m1|/(hbar |2 delta + i G1|) stays small
    assert 2 * abs(m1) / (HBAR * abs(2 * bench.delta + 1j * bench.atom.gamma1)) < 1e-2
