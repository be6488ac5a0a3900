"""Fundamental solution y_-(k, c, x2) of the Rayleigh equation.

    -y'' + (k^2 + U''/(U - c)) y = 0,   y(-h) = 0,  y'(-h) = 1.

Off the singular segment the equation is integrated directly.  For c in
U([-h, 0]) (and for complex c close to it) the critical layer at
U(x2c) = c is crossed with the Frobenius pair

    phi1 = tau + a2 tau^2 + ...,
    phi2 = 1 + b2 tau^2 + ... + q phi1 log(tau),   q = U''/U' at x2c,

using the branch of log(tau) that is the limit from c_I > 0.  Large
solutions are carried as mantissa times exp(log_scale).
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernel
from .errors import CriticalAtBoundary, OutOfRange, StepSizeUnderflow
from .profile import ShearProfile, invert, invert_complex


@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    r_loc_factor: float = 0.125
    series_terms: int = 16
    max_steps: int = 5_000_000
    backend: str | None = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.r_loc_factor > 0):
            raise ValueError("tolerances and r_loc_factor must be positive")
        if self.series_terms < 2:
            raise ValueError("series_terms must be at least 2")


DEFAULT = SolverOptions()


@dataclass(frozen=True)
class CriticalLayer:
    x2c: complex  # real for real c
    mu: float
    q: complex
    b2m: complex  # regularized derivative limit, log(U'|tau|/mu) + i pi 1[tau>0] convention
    y_at_xc: complex  # mantissa, scaled by exp(log_scale)
    log_scale: float
    r_loc: float
    series_terms: int
    self_test_error: float


@dataclass(frozen=True, eq=False)
class RaySolution:
    k: float
    c: complex
    grid: np.ndarray
    y_m: np.ndarray = field(repr=False)
    yp_m: np.ndarray = field(repr=False)
    log_scale: np.ndarray = field(repr=False)
    critical: CriticalLayer | None = None
    nsteps: int = 0

    @property
    def y(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.y_m * np.exp(self.log_scale)

    @property
    def yp(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.yp_m * np.exp(self.log_scale)

    @property
    def end(self) -> tuple[complex, complex, float]:
        """(y mantissa, y' mantissa, log scale) at x2 = 0."""
        return complex(self.y_m[-1]), complex(self.yp_m[-1]), float(self.log_scale[-1])


def mu_of(k: float) -> float:
    return 1.0 / math.sqrt(1.0 + float(k) ** 2)


def reg_threshold(profile: ShearProfile, k: float) -> float:
    return mu_of(k) / (2.0 * profile.rho0)


def _grid(profile: ShearProfile, grid) -> np.ndarray:
    if grid is None:
        return np.array([-profile.h, 0.0])
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing with at least two nodes")
    if abs(g[0] + profile.h) > 1e-14 * profile.h or abs(g[-1]) > 1e-14 * profile.h:
        raise ValueError("grid must cover [-h, 0] exactly")
    g = g.copy()
    g[0], g[-1] = -profile.h, 0.0
    return g


def _h_init(k: float, span: float) -> float:
    return min(span, 0.05 * mu_of(k))


def _integrate(profile, k, c, x0, y0, yp0, xout, opts):
    xout = np.asarray(xout, dtype=float)
    if len(xout) == 0:
        return (np.zeros(0, complex), np.zeros(0, complex), np.zeros(0), 0)
    ys, yps, ls, n, status = kernel.integrate(
        profile.program, float(k) ** 2, complex(c), float(x0), complex(y0),
        complex(yp0), xout, opts.rtol, opts.atol,
        _h_init(k, max(xout[-1] - x0, 1e-300)), opts.max_steps, backend=opts.backend)
    if status:
        raise StepSizeUnderflow(
            f"integration failed at k={k:.6g}, c={complex(c):.6g} "
            f"({'step underflow' if status == 1 else 'step budget exhausted'}); "
            "c is too close to the singular segment for the regular path")
    return ys, yps, ls, n


def solve_regular(profile: ShearProfile, k: float, c: complex, grid=None,
                  opts: SolverOptions = DEFAULT) -> RaySolution:
    """Direct adaptive integration; c must not lie on the real segment."""
    c = complex(c)
    if c.imag == 0.0 and profile.Umin <= c.real <= profile.Umax:
        raise StepSizeUnderflow(
            f"c = {c.real:.12g} lies on U([-h, 0]); use solve_limit")
    g = _grid(profile, grid)
    ys, yps, ls, n = _integrate(profile, k, c, g[0], 0.0, 1.0, g[1:], opts)
    return RaySolution(float(k), c, g, np.concatenate([[0j], ys]),
                       np.concatenate([[1 + 0j], yps]), np.concatenate([[0.0], ls]),
                       None, n)


# ------------------------------------------------------------- Frobenius

def frobenius_coefficients(profile: ShearProfile, k: float, s: complex, n: int):
    """Series coefficients of the local pair about the singular point s.

    Returns ``(a, b, q)`` with phi1 = sum a[j] tau^j (a[0]=0, a[1]=1) and
    the analytic part of phi2 = sum b[j] tau^j (b[0]=1, b[1]=0).
    """
    t = profile.taylor(s, n + 2)
    e = t[1:]  # U - c = tau * E(tau)
    d = np.array([(j + 2) * (j + 1) * t[j + 2] for j in range(n + 1)])  # U''
    w = np.zeros(n + 1, dtype=complex)  # W = tau*U''/(U - c) + k^2 tau
    for m in range(n + 1):
        w[m] = (d[m] - np.dot(e[1: m + 1], w[m - 1:: -1][:m])) / e[0]
    q = w[0]
    if n >= 1:
        w[1] += float(k) ** 2
    a = np.zeros(n + 1, dtype=complex)
    b = np.zeros(n + 1, dtype=complex)
    a[1] = 1.0
    b[0] = 1.0
    for j in range(2, n + 1):
        a[j] = np.dot(w[j - 2:: -1][: j - 1], a[1:j]) / (j * (j - 1))
    for m in range(1, n):
        acc = np.dot(w[m::-1], b[: m + 1])
        b[m + 1] = (acc - q * (2 * m + 1) * a[m + 1]) / (m * (m + 1))
    return a, b, q


def _log_upper(tau: complex) -> complex:
    """log(tau) continued from c_I > 0: cut along the positive imaginary axis."""
    if tau == 0:
        return complex(-math.inf, 0.0)
    arg = cmath.phase(tau)
    if arg > 0.5 * math.pi:
        arg -= 2.0 * math.pi
    return complex(math.log(abs(tau)), arg)


def _basis(a, b, q, tau: complex):
    """(phi1, phi1', phi2, phi2') at tau."""
    n = len(a) - 1
    p1 = dp1 = p2 = dp2 = 0j
    for j in range(n, 0, -1):  # Horner
        p1 = p1 * tau + a[j]
        p2 = p2 * tau + b[j]
    p1 *= tau
    p2 = p2 * tau + b[0]
    for j in range(n, 1, -1):
        dp1 = dp1 * tau + j * a[j]
        dp2 = dp2 * tau + j * b[j]
    dp1 = dp1 * tau + a[1]
    dp2 = dp2 * tau + b[1]
    if tau == 0:
        return p1, dp1, p2, complex(math.nan, math.nan)
    L = _log_upper(tau)
    return p1, dp1, p2 + q * p1 * L, dp2 + q * (dp1 * L + p1 / tau)


def _crossing(profile, k, c, s, g, opts):
    """Solve through the disk |x - s| < r_loc around the singular point s."""
    mu = mu_of(k)
    h = profile.h
    r = opts.r_loc_factor * min(mu, h)
    n = opts.series_terms
    while True:
        a, b, q = frobenius_coefficients(profile, k, s, n)
        a2, b2, _ = frobenius_coefficients(profile, k, s, 2 * n)
        xl, xr = s.real - r, s.real + r
        x_start = max(xl, -h)
        x_end = min(xr, 0.0)
        # probe the series on the disk edge reachable from the path
        tau_probe = [x_start - s, x_end - s]
        err = 0.0
        for tp in tau_probe:
            if tp == 0:
                continue
            v1 = np.array(_basis(a, b, q, tp))
            v2 = np.array(_basis(a2, b2, q, tp))
            err = max(err, float(np.max(np.abs(v1 - v2)) / max(1.0, np.max(np.abs(v2)))))
        if err < 1e-12 or r < 1e-6 * min(mu, h):
            break
        r *= 0.5
    y_m = np.zeros(len(g), dtype=complex)
    yp_m = np.zeros(len(g), dtype=complex)
    lsg = np.zeros(len(g))
    nsteps = 0
    # left regular segment
    if xl > -h:
        left = g[(g > -h) & (g < xl)]
        ys, yps, ls, nsteps = _integrate(profile, k, c, -h, 0.0, 1.0,
                                         np.append(left, xl), opts)
        idx = np.flatnonzero((g > -h) & (g < xl))
        y_m[idx], yp_m[idx], lsg[idx] = ys[:-1], yps[:-1], ls[:-1]
        y_m[0], yp_m[0] = 0.0, 1.0
        yL, ypL, lsL = ys[-1], yps[-1], ls[-1]
    else:
        yL, ypL, lsL = 0j, 1 + 0j, 0.0
    tauL = x_start - s
    if tauL == 0:
        A, B = 1 + 0j, 0j
    else:
        p1, dp1, p2, dp2 = _basis(a, b, q, tauL)
        W = p1 * dp2 - dp1 * p2
        A = (yL * dp2 - ypL * p2) / W
        B = (p1 * ypL - dp1 * yL) / W
    # inside the disk
    inside = np.flatnonzero((g >= x_start) & (g <= x_end))
    for i in inside:
        if i == 0 and xl <= -h:
            y_m[i], yp_m[i] = 0.0, 1.0
            continue
        if xl > -h and g[i] == x_start:
            continue
        p1, dp1, p2, dp2 = _basis(a, b, q, g[i] - s)
        y_m[i] = A * p1 + B * p2
        yp_m[i] = A * dp1 + B * dp2 if (g[i] - s) != 0 else complex(math.nan, math.nan)
        lsg[i] = lsL
    if xl > -h:
        # the left matching point may coincide with a grid node
        hit = np.flatnonzero(g == x_start)
        for i in hit:
            y_m[i], yp_m[i], lsg[i] = yL, ypL, lsL
    # right regular segment
    if xr < 0.0:
        p1, dp1, p2, dp2 = _basis(a, b, q, xr - s)
        yR, ypR = A * p1 + B * p2, A * dp1 + B * dp2
        idx = np.flatnonzero(g > xr)
        ys, yps, ls, n2 = _integrate(profile, k, c, xr, yR, ypR, g[idx], opts)
        y_m[idx], yp_m[idx], lsg[idx] = ys, yps, ls + lsL
        nsteps += n2
    u1 = complex(profile.taylor(s, 1)[1])
    A_reg = A - 1j * math.pi * q * B  # phi1 coefficient for log|tau| + i pi 1[tau > 0]
    b2m = A_reg + q * B * (1.0 - cmath.log(u1 / mu))
    crit = CriticalLayer(x2c=s, mu=mu, q=q, b2m=b2m, y_at_xc=B, log_scale=lsL,
                         r_loc=r, series_terms=n, self_test_error=err)
    return y_m, yp_m, lsg, crit, nsteps


def solve_limit(profile: ShearProfile, k: float, c: float, grid=None,
                opts: SolverOptions = DEFAULT) -> RaySolution:
    """The limit y_{0-} = lim_{c_I -> 0+} y_-(k, c + i c_I) for real c in U([-h, 0])."""
    c = complex(c)
    if c.imag != 0.0 or not (profile.Umin <= c.real <= profile.Umax):
        raise OutOfRange(f"solve_limit needs real c in [{profile.Umin}, {profile.Umax}]")
    cr = c.real
    g = _grid(profile, grid)
    if cr == profile.Umin:
        s = -profile.h
    elif cr == profile.Umax:
        s = 0.0
    else:
        s = invert(profile, cr)
    y_m, yp_m, lsg, crit, n = _crossing(profile, k, cr, complex(s, 0.0), g, opts)
    sol = RaySolution(float(k), complex(cr), g, y_m, yp_m, lsg, crit, n)
    if s == 0.0:
        raise CriticalAtBoundary("c = U(0): y' is log-singular at the surface", sol)
    return sol


def near_singular_point(profile: ShearProfile, k: float, c: complex,
                        opts: SolverOptions = DEFAULT) -> complex | None:
    """The complex critical point s with U(s) = c when it lies within the
    crossing disk reach of [-h, 0]; otherwise None."""
    c = complex(c)
    r = opts.r_loc_factor * min(mu_of(k), profile.h)
    reach = r * profile.sup_U1
    if (abs(c.imag) > reach or c.real < profile.Umin - reach
            or c.real > profile.Umax + reach):
        return None
    s = invert_complex(profile, c)
    if abs(complex(profile.U(s)) - c) > 1e-12 * max(1.0, abs(c)) + 1e-14:
        return None
    if abs(s.imag) < 0.5 * r and -profile.h - 0.5 * r < s.real < 0.5 * r:
        return s
    return None


def solve(profile: ShearProfile, k: float, c: complex, grid=None,
          opts: SolverOptions = DEFAULT, continuation: bool = False) -> RaySolution:
    """Dispatch to the appropriate path.

    Real c in U([-h, 0]) uses the limit solver.  Complex c within reach of
    the segment is handled by the same crossing (this is exact for c_I > 0);
    with ``continuation=True`` it also returns, for c_I < 0, the analytic
    continuation from the upper half plane instead of the conjugate value.
    """
    c = complex(c)
    if c.imag == 0.0 and profile.Umin <= c.real <= profile.Umax:
        return solve_limit(profile, k, c.real, grid, opts)
    s = near_singular_point(profile, k, c, opts)
    if s is not None and (c.imag >= 0.0 or continuation or s.real <= -profile.h):
        g = _grid(profile, grid)
        if c.imag == 0.0:
            s = complex(s.real, 0.0)
        y_m, yp_m, lsg, crit, n = _crossing(profile, k, c, s, g, opts)
        if s == 0:
            sol = RaySolution(float(k), c, g, y_m, yp_m, lsg, crit, n)
            raise CriticalAtBoundary("singular point at the surface", sol)
        return RaySolution(float(k), c, g, y_m, yp_m, lsg, crit, n)
    return solve_regular(profile, k, c, grid, opts)


# ------------------------------------------------------------ diagnostics

@dataclass(frozen=True)
class AsymptoticReport:
    k: float
    c: complex
    alpha: float
    ratio: float
    x_at_max: float


def _log_sinh(z: np.ndarray) -> np.ndarray:
    return z + np.log1p(-np.exp(-2.0 * z)) - math.log(2.0)


def asymptotic_bounds_check(profile: ShearProfile, k: float, c: complex,
                            alpha: float = 0.4, n: int = 201,
                            opts: SolverOptions = DEFAULT) -> AsymptoticReport:
    """sup |y/mu - sinh((x2+h)/mu)| / (mu^alpha sinh((x2+h)/mu)) over a grid."""
    g = np.linspace(-profile.h, 0.0, n)
    sol = solve(profile, k, c, grid=g, opts=opts)
    mu = mu_of(k)
    z = (g[1:] + profile.h) / mu
    ls = sol.log_scale[1:] - _log_sinh(z)
    with np.errstate(over="ignore", invalid="ignore"):
        rel = np.abs(sol.y_m[1:] * np.exp(ls) / mu - 1.0) / mu ** alpha
    rel = np.where(np.isfinite(rel), rel, np.inf)
    i = int(np.argmax(rel))
    return AsymptoticReport(float(k), complex(c), alpha, float(rel[i]), float(g[1 + i]))


def write_debug_csv(sol: RaySolution, path) -> None:
    """Columns x2, Re y, Im y, Re yp, Im yp (true values)."""
    y, yp = sol.y, sol.yp
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x2", "Re y", "Im y", "Re yp", "Im yp"])
        for x, a, b in zip(sol.grid, y, yp):
            w.writerow([repr(float(x)), repr(float(a.real)), repr(float(a.imag)),
                        repr(float(b.real)), repr(float(b.imag))])


def with_options(opts: SolverOptions, **kw) -> SolverOptions:
    return replace(opts, **kw)
