"""Numba switch for the hot kernels.

Kernels are written as plain loop functions.  When numba is importable and
``ENTANGLED_TPA_NUMBA`` is not set to a false value, :func:`jit` compiles them
with ``numba.njit``; otherwise the loop source runs as ordinary Python and the
dispatching modules fall back to vectorized numpy paths where one exists.

Set ``ENTANGLED_TPA_NUMBA=0`` before import to force the numpy path.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSEY = {"0", "false", "no", "off"}

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("ENTANGLED_TPA_NUMBA", "1").strip().lower() not in _FALSEY


def jit(fn):
    """Compile ``fn`` with numba when it is available, else return it unchanged.

    The compiled object keeps the Python original on ``.py_func`` so the
    benchmark can time both paths from the same source.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
