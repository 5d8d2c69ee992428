"""Time-domain oracle for the three-level ladder driven by one signal/idler pair.

Basis and frame
---------------
States are ordered (h, i, g): |1> has both photons absorbed, |2> one photon,
|3> none.  With m1, m2 the coupling matrix elements the lab-frame equations are

    i hbar c1' = m2* e^{+i delta t} c2                       - i hbar Gamma2/2 c1
    i hbar c2' = m1* e^{-i delta t} c3 + m2 e^{-i delta t} c1 - i hbar Gamma1/2 c2
    i hbar c3' = m1 e^{+i delta t} c2

and the perturbative amplitude equations follow from c3 = 1.  The explicit
phases are removed by c2 = b2 e^{-i delta t}: the system becomes autonomous and
its steady state is stationary.  c1 needs no demodulation (its drive phase
e^{i delta t} cancels against that of c2), so the long-time alpha1 compares
directly with the closed-form steady state; alpha2 is reported both raw and
demodulated, alpha2 e^{+i delta t}.

Integration runs in the rotating frame by default.  The lab frame is kept for
short-horizon cross-checks; it must resolve every drive cycle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._accel import USE_NUMBA, jit
from .constants import HBAR
from .errors import StepFailure

PERTURBATIVE_WARN = 0.1

MODEL_AMP_ROTATING = 0
MODEL_AMP_LAB = 1
MODEL_RHO_ROTATING = 2
_MODELS = {("amplitudes", "rotating"): MODEL_AMP_ROTATING,
           ("amplitudes", "lab"): MODEL_AMP_LAB,
           ("density", "rotating"): MODEL_RHO_ROTATING}

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class LadderAmplitudeState:
    alpha1: complex
    alpha2: complex
    t: float
    delta: float = 0.0
    alpha3: complex = 1.0

    def __post_init__(self):
        if max(abs(self.alpha1), abs(self.alpha2)) > PERTURBATIVE_WARN:
            warnings.warn(f"amplitudes exceed {PERTURBATIVE_WARN}; the undepleted-ground "
                          "approximation is no longer valid", RuntimeWarning, stacklevel=3)

    @property
    def alpha2_demodulated(self) -> complex:
        return self.alpha2 * np.exp(1j * self.delta * self.t)

    def vector(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.alpha3], dtype=complex)


@dataclass(frozen=True)
class DensityMatrixState:
    rho: np.ndarray
    t: float

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.rho - self.rho.conj().T)) <= atol)


# -- kernels -------------------------------------------------------------------

@jit
def _rhs(model, t, y, p, out):
    # p = (m1/hbar, m2/hbar, delta, gamma1, gamma2)
    a1 = p[0]
    a2 = p[1]
    delta = p[2].real
    g1 = p[3].real
    g2 = p[4].real
    if model == 0:
        out[0] = -1j * a2.conjugate() * y[1] - 0.5 * g2 * y[0]
        out[1] = 1j * delta * y[1] - 1j * a1.conjugate() - 0.5 * g1 * y[1]
    elif model == 1:
        ph = np.exp(1j * delta * t)
        out[0] = -1j * a2.conjugate() * ph * y[1] - 0.5 * g2 * y[0]
        out[1] = -1j * a1.conjugate() / ph - 0.5 * g1 * y[1]
    else:
        # rho stored row-major; H/hbar = [[0, a2*, 0], [a2, -delta, a1*], [0, a1, 0]]
        h = np.zeros((3, 3), dtype=np.complex128)
        h[0, 1] = a2.conjugate()
        h[1, 0] = a2
        h[1, 1] = -delta
        h[1, 2] = a1.conjugate()
        h[2, 1] = a1
        gam = np.array([g2, g1, 0.0])
        for i in range(3):
            for j in range(3):
                acc = 0j
                for k in range(3):
                    acc += h[i, k] * y[3 * k + j] - y[3 * i + k] * h[k, j]
                out[3 * i + j] = -1j * acc - 0.5 * (gam[i] + gam[j]) * y[3 * i + j]


@jit
def dp45_integrate(model, y0, p, t_out, rtol, h0, max_steps, c, a, b5, e):
    """Adaptive Dormand-Prince 5(4) with componentwise running-max error scaling.

    Returns (states at t_out, accepted steps, status); status 0 is success,
    1 step-size underflow, 2 step budget exhausted.
    """
    n = y0.size
    n_out = t_out.size
    ys = np.zeros((n_out, n), dtype=np.complex128)
    k = np.zeros((7, n), dtype=np.complex128)
    y = y0.copy()
    ytmp = np.zeros(n, dtype=np.complex128)
    y5 = np.zeros(n, dtype=np.complex128)
    runmax = np.abs(y0)
    t = 0.0
    h = h0
    steps = 0
    idx = 0
    while idx < n_out and t_out[idx] <= 0.0:
        ys[idx] = y
        idx += 1
    _rhs(model, t, y, p, k[0])
    while idx < n_out:
        target = t_out[idx]
        if steps >= max_steps:
            return ys, steps, 2
        hit = False
        h_free = h
        if t + h >= target:
            h = target - t
            hit = True
        for s in range(1, 7):
            for m in range(n):
                acc = 0j
                for q in range(s):
                    acc += a[s, q] * k[q, m]
                ytmp[m] = y[m] + h * acc
            _rhs(model, t + c[s] * h, ytmp, p, k[s])
        # stage 7 sits at y5 (FSAL)
        err = 0.0
        for m in range(n):
            acc = 0j
            for q in range(7):
                acc += e[q] * k[q, m]
            y5[m] = ytmp[m]
            scale = rtol * max(runmax[m], abs(y[m]), abs(y5[m])) + 1e-300
            ratio = abs(h * acc) / scale
            if ratio > err:
                err = ratio
        if err <= 1.0:
            t = target if hit else t + h
            for m in range(n):
                y[m] = y5[m]
                if abs(y5[m]) > runmax[m]:
                    runmax[m] = abs(y5[m])
                k[0, m] = k[6, m]
            steps += 1
            if hit:
                ys[idx] = y
                idx += 1
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if hit:
                # resume from the unclamped step rather than the short landing step
                h = max(h, h_free)
                factor = min(factor, 1.0)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
            hit = False
        h = h * factor
        if h <= 1e-15 * max(abs(t), 1e-300):
            return ys, steps, 1
    return ys, steps, 0


# -- drivers ------------------------------------------------------------------------

def _params(m1, m2, delta, gamma1, gamma2):
    if not (gamma1 >= 0 and gamma2 >= 0):
        raise ValueError("decay rates must be non-negative")
    return np.array([m1 / HBAR, m2 / HBAR, delta, gamma1, gamma2], dtype=np.complex128)


def _initial_step(p, t_end):
    fastest = max(abs(p[0]), abs(p[1]), abs(p[2]), abs(p[3]), abs(p[4]), 1.0 / t_end)
    return 1e-3 / fastest


def _t_out(t_final, t_eval):
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final!r}")
    if t_eval is None:
        return np.array([float(t_final)])
    grid = np.asarray(t_eval, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > t_final:
        raise ValueError("t_eval must increase strictly within [0, t_final]")
    return grid


def _rhs_py(model, p):
    def f(t, y):
        out = np.empty_like(y)
        _rhs.py_func(model, t, y, p, out) if hasattr(_rhs, "py_func") else _rhs(model, t, y, p, out)
        return out
    return f


def _solve(model, y0, p, t_out, dt_tol, max_steps, use_numba):
    use_numba = USE_NUMBA if use_numba is None else use_numba
    h0 = _initial_step(p, t_out[-1])
    if use_numba:
        ys, steps, status = dp45_integrate(model, y0, p, t_out, dt_tol, h0, max_steps,
                                           _C, _A, _B5, _E)
        if status == 1:
            raise StepFailure(f"step size underflow before t = {t_out[-1]:g} s")
        if status == 2:
            raise StepFailure(f"step budget of {max_steps} exhausted before t = {t_out[-1]:g} s")
        return ys
    # numpy/scipy fallback; absolute tolerance from the expected amplitude scale
    # (floored so that zero couplings do not drive atol into the subnormal range)
    amp_scale = max(abs(p[0]) / max(abs(p[3]), abs(p[2]), 1e-300), 1e-20)
    rhs = _rhs_py(model, p)
    budget = [12 * max_steps + 2]  # DOP853 spends 12 evaluations per step

    def counted(t, y):
        budget[0] -= 1
        if budget[0] < 0:
            raise StepFailure(f"step budget of {max_steps} exhausted before t = {t_out[-1]:g} s")
        return rhs(t, y)

    sol = solve_ivp(counted, (0.0, float(t_out[-1])), y0, method="DOP853",
                    t_eval=t_out, rtol=dt_tol, atol=dt_tol * 1e-6 * amp_scale)
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y.T


def amplitude_trajectory(m1, m2, delta: float, gamma1: float, gamma2: float, t_final: float,
                         dt_tol: float = 1e-10, *, t_eval=None, frame: str = "rotating",
                         max_steps: int = 50_000_000, use_numba: bool | None = None):
    """Amplitude states at the ``t_eval`` times (default: just ``t_final``)."""
    try:
        model = _MODELS[("amplitudes", frame)]
    except KeyError:
        raise ValueError(f"frame must be 'rotating' or 'lab', got {frame!r}") from None
    p = _params(m1, m2, delta, gamma1, gamma2)
    t_out = _t_out(t_final, t_eval)
    ys = _solve(model, np.zeros(2, dtype=np.complex128), p, t_out, dt_tol, max_steps, use_numba)
    states = []
    for t, y in zip(t_out, ys):
        alpha2 = y[1] * np.exp(-1j * delta * t) if model == MODEL_AMP_ROTATING else y[1]
        states.append(LadderAmplitudeState(complex(y[0]), complex(alpha2), float(t), float(delta)))
    return states


def integrate_amplitudes(m1, m2, delta: float, gamma1: float, gamma2: float, t_final: float,
                         dt_tol: float = 1e-10, **kwargs) -> LadderAmplitudeState:
    """Perturbative ladder amplitudes at ``t_final`` from alpha1 = alpha2 = 0.

    Parameters
    ----------
    m1, m2 : complex
        Coupling matrix elements, J.
    delta : float
        Intermediate-state detuning omega_s - omega1, rad/s.
    dt_tol : float
        Relative local error tolerance of the adaptive integrator.

    Raises
    ------
    StepFailure
        If the step controller underflows or runs out of steps.
    """
    return amplitude_trajectory(m1, m2, delta, gamma1, gamma2, t_final, dt_tol, **kwargs)[-1]


def steady_state_amplitudes(m1, m2, delta: float, gamma1: float, gamma2: float):
    """Closed-form t -> infinity limit (alpha1, demodulated alpha2)."""
    b2 = -2j * np.conj(m1) / (HBAR * (gamma1 - 2j * delta))
    alpha1 = -2j * np.conj(m2) * b2 / (HBAR * gamma2)
    return complex(alpha1), complex(b2)


def _rotating_phases(delta, t):
    return np.array([1.0, np.exp(-1j * delta * t), 1.0])


def evolve_density_matrix(m1, m2, delta: float, gamma1: float, gamma2: float, t_final: float,
                          dt_tol: float = 1e-10, *, rho0=None, t_eval=None,
                          max_steps: int = 50_000_000, use_numba: bool | None = None):
    """Density matrix in the (h, i, g) basis under the loss-only master equation.

    rho' = -(i/hbar)[V, rho] - {Gamma, rho}/2 with Gamma = diag(Gamma2, Gamma1, 0);
    the trace decays because population lost from h and i is not returned.
    Returns a :class:`DensityMatrixState` (or a list of them when ``t_eval`` is
    given) expressed in the lab frame.
    """
    if rho0 is None:
        rho0 = np.zeros((3, 3), dtype=complex)
        rho0[2, 2] = 1.0
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (3, 3) or np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12:
        raise ValueError("rho0 must be a Hermitian 3x3 matrix")
    tr = np.trace(rho0).real
    if abs(np.trace(rho0 @ rho0).real - tr * tr) > 1e-12 * max(tr * tr, 1.0):
        raise ValueError("rho0 must be a pure state")
    p = _params(m1, m2, delta, gamma1, gamma2)
    t_out = _t_out(t_final, t_eval)
    ys = _solve(MODEL_RHO_ROTATING, rho0.reshape(-1).copy(), p, t_out, dt_tol, max_steps,
                use_numba)
    states = []
    for t, y in zip(t_out, ys):
        ph = _rotating_phases(delta, t)
        rho = y.reshape(3, 3) * np.outer(ph, ph.conj())
        states.append(DensityMatrixState(rho, float(t)))
    return states if t_eval is not None else states[-1]


def check_factorization(rho: DensityMatrixState, amps: LadderAmplitudeState) -> float:
    """max_ij |rho_ij - alpha_i alpha_j*| with alpha = (alpha1, alpha2, 1)."""
    if not math.isclose(rho.t, amps.t, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError("states refer to different times")
    vec = amps.vector()
    return float(np.max(np.abs(rho.rho - np.outer(vec, vec.conj()))))
