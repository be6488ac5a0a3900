"""Backend selection for the Rayleigh integrator.

The compiled ``_core`` extension is used when importable.  Setting
``SHEARSPEC_BACKEND=python`` forces the pure-Python fallback.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from . import _pykernel

_NS = _dop.N_STAGES
TABLEAU = (
    np.ascontiguousarray(_dop.A[:_NS, :_NS], dtype=np.float64),
    np.ascontiguousarray(_dop.B, dtype=np.float64),
    np.ascontiguousarray(_dop.C[:_NS], dtype=np.float64),
    np.ascontiguousarray(_dop.E3, dtype=np.float64),
    np.ascontiguousarray(_dop.E5, dtype=np.float64),
)

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

BACKEND = "cython" if _core is not None and os.environ.get(
    "SHEARSPEC_BACKEND", "").lower() != "python" else "python"


def integrate(program, k2, c, x0, y0, yp0, xout, rtol, atol, h_init,
              max_steps, backend: str | None = None):
    """Dispatch to the selected backend.  See ``_pykernel.integrate``."""
    ops, iargs, fargs, depth = program
    xout = np.ascontiguousarray(xout, dtype=np.float64)
    use = backend or BACKEND
    if use == "cython":
        if _core is None:
            raise RuntimeError("compiled kernel is not available")
        return _core.integrate(ops, iargs, fargs, depth, float(k2), complex(c),
                               float(x0), complex(y0), complex(yp0), xout,
                               float(rtol), float(atol), float(h_init),
                               int(max_steps), *TABLEAU)
    ys, yps, ls, n, status = _pykernel.integrate(
        ops, iargs, fargs, depth, k2, c, x0, y0, yp0, xout, rtol, atol,
        h_init, max_steps, *TABLEAU)
    return (np.asarray(ys, dtype=complex), np.asarray(yps, dtype=complex),
            np.asarray(ls, dtype=float), n, status)
