"""Scenario execution: single runs, sweeps, bandwidth optimization, the table1 report."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..constants import omega_span_to_wavelength, wavelength_span_to_omega
from ..engine import (PairKind, TpaReport, coincidence_profile, microtoroid_rate, pair_separation,
                      total_rate)
from ..errors import NotUnimodal, TpaError
from ..fiber import normalize_mode, single_mode_check, v_number
from ..numerics import maximize_scalar
from .config import NM, TABLE1_REFERENCE, ScenarioConfig, load_scenario

X_UNIT = "nm"


@dataclass(frozen=True)
class SweepRow:
    x_value: float
    rate_per_s: float
    enhancement_factor: float | None = None
    separation_s_m: float | None = None


@dataclass(frozen=True)
class SweepResult:
    variable: str
    unit: str
    rows: tuple
    optimum: tuple | None = None
    parameters: dict = field(default_factory=dict)
    config_hash: str = ""

    def __post_init__(self):
        xs = [row.x_value for row in self.rows]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ValueError("sweep rows must be sorted in x")
        if any(row.rate_per_s < 0 for row in self.rows):
            raise ValueError("negative rate in sweep")

    @property
    def x(self) -> np.ndarray:
        return np.array([row.x_value for row in self.rows])

    @property
    def rates(self) -> np.ndarray:
        return np.array([row.rate_per_s for row in self.rows])

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class SweepPointError(TpaError):
    def __init__(self, x_value, unit, cause):
        super().__init__(f"sweep point x = {x_value!r} {unit} failed: {cause}")
        self.x_value = x_value


def _modes(config: ScenarioConfig):
    kw = dict(orientation=0.0, energy_convention=config.model.energy_convention)
    mode_s = normalize_mode(config.fiber, config.pair.omega_s0, **kw)
    if config.pair.omega_i0 == config.pair.omega_s0:
        return mode_s, mode_s
    return mode_s, normalize_mode(config.fiber, config.pair.omega_i0, **kw)


def run_scenario(config: ScenarioConfig) -> TpaReport:
    """Total TPA rate for the configured fiber, or the toroid when one is configured."""
    if config.toroid is not None:
        report = microtoroid_rate(config.toroid, config.atom, config.vapor, config.wavelength,
                                  core_index=config.fiber.core_index,
                                  energy_convention=config.model.energy_convention,
                                  azimuth=config.model.azimuth)
    else:
        mode_s, mode_i = _modes(config)
        report = total_rate(mode_s, mode_i, config.atom, config.pair, config.fiber, config.vapor,
                            azimuth=config.model.azimuth, velocity=config.model.velocity)
    echo = dict(report.inputs_echo)
    echo["parameters"] = config.parameters
    echo["config_hash"] = config.config_hash
    return TpaReport(report.kind, report.rate_R2, report.per_atom_rate_map,
                     report.amplitude_diagnostics, echo, report.enhancement_factor,
                     report.rate_ratio_factor, report.separation_s, report.diagnostics)


def _sweep_key(variable):
    return {"detuning": "pair.detuning_nm", "bandwidth": "pair.bandwidth_nm"}[variable]


def _row(config: ScenarioConfig, x: float, key: str) -> SweepRow:
    try:
        report = run_scenario(config.replace({key: x}))
    except TpaError as exc:
        raise SweepPointError(x, X_UNIT, exc) from exc
    return SweepRow(x, report.rate_R2, report.enhancement_factor, report.separation_s)


def _map_points(fn, xs, jobs):
    if jobs <= 1 or len(xs) == 1:
        return [fn(x) for x in xs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, xs))


def sweep(config: ScenarioConfig, jobs: int = 1) -> SweepResult:
    """Rate at ``sweep.steps`` evenly spaced values of the swept variable.

    Any failing point aborts the sweep with :class:`SweepPointError` naming x.
    """
    spec = config.sweep
    if spec is None:
        raise TpaError("configuration has no sweep block (set sweep.variable)")
    key = _sweep_key(spec.variable)
    xs = [float(x) for x in np.linspace(spec.lo_nm, spec.hi_nm, spec.steps)]
    # warm the mode caches once so worker threads only evaluate kernels
    _row(config, xs[0], key)
    rows = _map_points(lambda x: _row(config, x, key), xs, jobs)
    return SweepResult(spec.variable, X_UNIT, tuple(rows), None, config.parameters,
                       config.config_hash)


def bandwidth_rate(config: ScenarioConfig, sigma: float) -> float:
    """Entangled total rate at bandwidth ``sigma`` (rad/s), other inputs from ``config``."""
    sigma_nm = omega_span_to_wavelength(sigma, config.wavelength) / NM
    return run_scenario(config.replace({"pair.bandwidth_nm": sigma_nm})).rate_R2


def count_local_maxima(values, rtol: float = 1e-9) -> int:
    """Number of maxima in a sampled curve, edges included.

    Differences below ``rtol`` times the largest value count as flat, so
    round-off ripples on a plateau do not register as extra peaks.
    """
    values = np.asarray(values, dtype=float)
    steps = np.diff(values)
    steps[np.abs(steps) <= rtol * np.max(np.abs(values))] = 0.0
    signs = [int(np.sign(x)) for x in steps if x != 0.0]
    if not signs:
        return 1
    peaks = sum(1 for a, b in zip(signs, signs[1:]) if a > 0 > b)
    return peaks + (signs[0] < 0) + (signs[-1] > 0)


def optimize_bandwidth(config: ScenarioConfig, lo_nm: float | None = None,
                       hi_nm: float | None = None, *, tol: float = 1e-10, jobs: int = 1,
                       unimodal_rtol: float = 1e-9):
    """Bandwidth that maximizes the entangled rate at the configured detuning.

    A coarse pre-scan verifies a single interior maximum before the bracketed
    search.

    Returns
    -------
    dict
        ``sigma_star_rad_s``, ``sigma_star_nm``, ``rate_star`` and the pre-scan.

    Raises
    ------
    NotUnimodal
        If the pre-scan shows more than one local maximum.
    """
    if config.pair.kind is not PairKind.ENTANGLED:
        raise TpaError("bandwidth optimization needs an entangled pair")
    params = config.parameters
    lo_nm = params["optimize.lo_nm"] if lo_nm is None else lo_nm
    hi_nm = params["optimize.hi_nm"] if hi_nm is None else hi_nm
    lam = config.wavelength
    lo, hi = (wavelength_span_to_omega(x * NM, lam) for x in (lo_nm, hi_nm))
    n = params["optimize.prescan_points"]
    grid = np.linspace(lo, hi, n)
    values = _map_points(lambda s: bandwidth_rate(config, float(s)), list(grid), jobs)
    peaks = count_local_maxima(values, unimodal_rtol)
    if peaks != 1:
        raise NotUnimodal(f"pre-scan over [{lo_nm}, {hi_nm}] nm found {peaks} local maxima")
    k = int(np.argmax(values))
    if k == 0 or k == n - 1:
        raise NotUnimodal(f"maximum sits on the bracket edge at {omega_span_to_wavelength(grid[k], lam) / NM:.4g} nm")
    sigma_star, rate_star = maximize_scalar(lambda s: bandwidth_rate(config, s),
                                            float(grid[k - 1]), float(grid[k + 1]), tol=tol)
    return {
        "sigma_star_rad_s": sigma_star,
        "sigma_star_nm": omega_span_to_wavelength(sigma_star, lam) / NM,
        "rate_star": rate_star,
        "prescan_sigma_rad_s": [float(s) for s in grid],
        "prescan_rate": [float(r) for r in values],
    }


def table1(overrides=None, jobs: int = 1) -> list[dict[str, Any]]:
    """The three table1 scenarios with their reference values alongside."""
    names = list(TABLE1_REFERENCE)

    def one(name):
        config = load_scenario(name, overrides=overrides)
        report = run_scenario(config)
        return {"scenario": name, "rate_per_s": report.rate_R2,
                "reference_rate_per_s": TABLE1_REFERENCE[name],
                "ratio_to_reference": report.rate_R2 / TABLE1_REFERENCE[name],
                "enhancement_factor": report.enhancement_factor,
                "separation_s_m": report.separation_s,
                "config_hash": config.config_hash, "parameters": config.parameters}

    return _map_points(one, names, jobs)


def mode_report(config: ScenarioConfig) -> dict[str, Any]:
    mode_s, _ = _modes(config)
    omega = config.pair.omega_s0
    return {
        "wavelength_m": config.wavelength,
        "diameter_m": config.fiber.diameter,
        "v_number": v_number(config.fiber, omega),
        "single_mode": single_mode_check(config.fiber, omega),
        "beta_per_m": mode_s.beta,
        "effective_index": mode_s.effective_index,
        "group_velocity_m_s": mode_s.group_velocity,
        "phase_velocity_m_s": mode_s.phase_velocity,
        "energy_fraction_outside": mode_s.energy_fraction_outside,
        "norm_factor": mode_s.norm_factor,
        "surface_intensity_phi0": float(mode_s.intensity(config.fiber.radius, 0.0)),
        "surface_intensity_phi90": float(mode_s.intensity(config.fiber.radius, math.pi / 2)),
        "energy_convention": mode_s.energy_convention,
    }


def coincidence_report(config: ScenarioConfig, points: int = 41, extent: float = 4.0):
    """Relative coincidence density against signal-idler separation."""
    mode_s, _ = _modes(config)
    u = mode_s.group_velocity if config.model.velocity == "group" else mode_s.phase_velocity
    s = pair_separation(u, config.pair.sigma)
    z = np.linspace(-extent * s, extent * s, points)
    density = coincidence_profile(z, u, config.pair.sigma)
    return {"separation_s_m": s, "velocity_m_s": u,
            "rows": [(float(a), float(b)) for a, b in zip(z, density)]}
