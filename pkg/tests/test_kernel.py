import numpy as np
import pytest

from shearspec import kernel
from shearspec.rayleigh import SolverOptions, solve, solve_regular

needs_core = pytest.mark.skipif(kernel._core is None, reason="compiled kernel not built")


def test_backend_name():
    assert kernel.BACKEND in ("cython", "python")


@needs_core
@pytest.mark.parametrize("k,c", [(0.5, 1.7), (3.0, -1.4 + 0.2j), (12.0, 0.3 + 0.05j), (1.0, 0.25)])
def test_backends_agree(tanh2, k, c):
    grid = np.linspace(-2.0, 0.0, 9)
    a = solve(tanh2, k, c, grid=grid, opts=SolverOptions(backend="cython"))
    b = solve(tanh2, k, c, grid=grid, opts=SolverOptions(backend="python"))
    assert np.allclose(a.y, b.y, rtol=1e-12, atol=0)
    assert np.allclose(a.yp, b.yp, rtol=1e-12, atol=0)


def test_python_backend_couette(couette):
    sol = solve_regular(couette, 2.0, 3.0, opts=SolverOptions(backend="python"))
    y, yp, ls = sol.end
    assert abs(y * np.exp(ls) - np.sinh(2.0) / 2) < 1e-9
    assert abs(yp * np.exp(ls) - np.cosh(2.0)) < 1e-9


def test_rescaling_keeps_large_k_finite(tanh2):
    sol = solve_regular(tanh2, 800.0, 2.0)
    y, yp, ls = sol.end
    assert np.isfinite(y) and np.isfinite(yp)
    assert ls + np.log(abs(y)) > 1500  # |y| ~ exp(1600) overflows; the mantissa/log-scale split does not
    assert abs(yp / y - 800.0) < 1.0


def test_env_forces_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SHEARSPEC_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import shearspec; print(shearspec.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
