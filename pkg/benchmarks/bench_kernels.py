"""Timing of the numba kernels against their numpy/scipy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  Each row reports the best of
several repeats after one warm-up call (which absorbs JIT compilation), and the
largest relative difference between the two paths.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from entangled_tpa._accel import HAVE_NUMBA
from entangled_tpa.constants import HBAR
from entangled_tpa.dynamics import integrate_amplitudes
from entangled_tpa.engine import _detuning_sum
from entangled_tpa.numerics import erfi_complex, scaled_erfi_minus_i


def best_of(fn, repeats):
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def rel_diff(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def cases(n_points, rng):
    z = rng.uniform(-6, 6, n_points) + 1j * rng.uniform(-6, 6, n_points)
    yield "erfi_complex", lambda nb: erfi_complex(z, use_numba=nb)
    yield "scaled_erfi_minus_i", lambda nb: scaled_erfi_minus_i(z, use_numba=nb)

    sigma, gamma1 = 3.11e12, 1e9
    nu = np.linspace(-8 * sigma, 8 * sigma, 2**18 + 1)
    w = np.full(nu.size, nu[1] - nu[0])
    yield "detuning_sum 2^18", lambda nb: _detuning_sum(nu, w, sigma, 6.54e12, gamma1, nb)

    m1, m2 = HBAR * 1e5, HBAR * 2e5
    yield "amplitude ODE 2/Gamma", lambda nb: integrate_amplitudes(
        m1, m2, 6.54e12, 1e9, 1e9, 2e-9, 1e-9, use_numba=nb).alpha1


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the fallback path is available")
        return
    rng = np.random.default_rng(7)
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fn in cases(args.points, rng):
        t_nb, out_nb = best_of(lambda: fn(True), args.repeats)
        t_np, out_np = best_of(lambda: fn(False), args.repeats)
        print(f"{name:<24}{t_nb:12.4g}{t_np:12.4g}{t_np / t_nb:10.1f}{rel_diff(out_nb, out_np):15.2e}")


if __name__ == "__main__":
    main()
