"""Dispersion functions.

    Y(k, c)     = y_-'(0) / y_-(0)
    Fbold(k, c) = (U(0)-c)^2 y_-'(0) - (U'(0)(U(0)-c) + g) y_-(0)
    F(k, c)     = Y (U(0)-c)^2 - U'(0)(U(0)-c) - g
    F_sigma     = F - sigma k^2

Fbold is entire in c off the segment and is the function used for
contour counting; F is scale free and is used for Newton iterations.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import rayleigh
from .errors import AtU0, CriticalAtBoundary, PreconditionUnverified, Y0Vanishes
from .profile import ShearProfile, invert
from .rayleigh import DEFAULT, SolverOptions

Y0_TOL = 1e-8
AT_U0_TOL = 1e-6


class Validity(enum.Enum):
    OK = "ok"
    Y0_VANISHES = "y0_vanishes"
    AT_U0 = "at_U0"


@dataclass(frozen=True)
class DispersionSample:
    """One evaluation.  ``Fbold`` is a mantissa: the true value is
    ``Fbold * exp(log_scale)`` (log_scale is 0 unless y_- is huge)."""

    k: float
    c: complex
    Y: complex | None
    F: complex
    Fbold: complex
    sigma: float
    valid: Validity
    g: float
    y0: complex  # mantissa of y_-(0)
    log_scale: float = 0.0

    @property
    def F_sigma(self) -> complex:
        return self.F - self.sigma * self.k ** 2

    @property
    def Fbold_sigma(self) -> complex:
        return self.Fbold - self.sigma * self.k ** 2 * self.y0


def _surface(profile: ShearProfile):
    return float(profile.U(0.0)), float(profile.U1(0.0))


def _log_sinh(z: float) -> float:
    if z > 20:
        return z - math.log(2.0)
    return math.log(math.sinh(z)) if z > 0 else -math.inf


def y0_vanishes(profile: ShearProfile, k: float, y0: complex, ls: float) -> bool:
    mu = rayleigh.mu_of(k)
    if y0 == 0:
        return True
    lhs = math.log(abs(y0)) + ls
    return lhs < math.log(Y0_TOL * mu) + _log_sinh(profile.h / mu)


def eval_F(profile: ShearProfile, g: float, sigma: float, k: float, c: complex,
           opts: SolverOptions = DEFAULT, continuation: bool = False) -> DispersionSample:
    """Evaluate Y, F, Fbold at (k, c) through the appropriate solver path."""
    if not g > 0:
        raise ValueError("g must be positive")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    c = complex(c)
    k = float(k)
    U0, U1 = _surface(profile)
    if c == U0:
        # the log blow-up of y' is killed by (U(0) - c)^2
        try:
            rayleigh.solve_limit(profile, k, c.real, opts=opts)
        except CriticalAtBoundary as exc:
            y0, _, ls = exc.solution.end
        return DispersionSample(k, c, None, complex(-g), -g * y0, sigma,
                                Validity.AT_U0, g, y0, ls)
    sol = rayleigh.solve(profile, k, c, opts=opts, continuation=continuation)
    y0, yp0, ls = sol.end
    d = U0 - c
    Fbold = d * d * yp0 - (U1 * d + g) * y0
    if abs(c - U0) < AT_U0_TOL * profile.spread:
        valid = Validity.AT_U0
        F = Fbold / y0
        Y = None
    elif y0_vanishes(profile, k, y0, ls):
        valid = Validity.Y0_VANISHES
        F = Fbold / y0 if y0 != 0 else complex(math.inf)
        Y = None
    else:
        valid = Validity.OK
        Y = yp0 / y0
        F = Y * d * d - U1 * d - g
    return DispersionSample(k, c, Y, complex(F), complex(Fbold), float(sigma),
                            valid, float(g), y0, ls)


def eval_Y(profile: ShearProfile, k: float, c: complex,
           opts: SolverOptions = DEFAULT) -> complex | None:
    """Y(k, c), or None where y_-(0) vanishes.  Raises AtU0 near c = U(0)."""
    c = complex(c)
    U0 = float(profile.U(0.0))
    if abs(c - U0) < AT_U0_TOL * profile.spread:
        raise AtU0(f"c = {c} is within {AT_U0_TOL}*(Umax-Umin) of U(0)")
    s = eval_F(profile, 1.0, 0.0, k, c, opts)
    return s.Y


def eval_YI_formula(profile: ShearProfile, k: float, c: float,
                    opts: SolverOptions = DEFAULT) -> float:
    """pi U''(x2c) y(x2c)^2 / (U'(x2c) |y(0)|^2) for real interior c."""
    c = float(np.real(c))
    if not (profile.Umin < c < profile.Umax):
        raise ValueError("c must be interior to U([-h, 0])")
    sol = rayleigh.solve_limit(profile, k, c, opts=opts)
    y0, _, ls = sol.end
    if y0_vanishes(profile, k, y0, ls):
        raise Y0Vanishes(f"y_-(0) vanishes at k={k}, c={c}")
    crit = sol.critical
    xc = crit.x2c.real
    yc = crit.y_at_xc.real
    ratio = (yc / abs(y0)) ** 2 * math.exp(2.0 * (crit.log_scale - ls))
    return math.pi * float(profile.U2(xc)) * ratio / float(profile.U1(xc))


def F_at_zero_k(profile: ShearProfile, g: float, c: float) -> float:
    """Closed form 1/int (U-c)^-2 - g for real c outside the range (quadrature)."""
    from scipy.integrate import quad

    val, _ = quad(lambda x: 1.0 / (float(profile.U(x)) - c) ** 2, -profile.h, 0.0,
                  epsabs=0.0, epsrel=1e-13, limit=200)
    return 1.0 / val - g


def cauchy_residual(profile: ShearProfile, k: float, c: complex,
                    opts: SolverOptions = DEFAULT, panels: int | None = None,
                    nodes: int = 12, check_precondition: bool = True) -> float:
    """|Y(k,c) - (1/pi) int Y_I(k,c')/(c'-c) dc' - k coth(kh)| for c off the segment.

    The integral is taken in x2 (c' = U(x2)) with Gauss-Legendre panels
    clustered towards the surface, where Y_I is concentrated.
    """
    c = complex(c)
    if c.imag == 0.0 and profile.Umin <= c.real <= profile.Umax:
        raise ValueError("c must be off the segment U([-h, 0])")
    k = float(k)
    if check_precondition:
        from .contour import winding_number, semicircle_region

        # zeros come in conjugate pairs; the upper half and the real axis
        # outside the segment cover them all
        region = semicircle_region(profile, 1e-4 * profile.spread)

        def y0_of(z):
            return rayleigh.solve(profile, k, z, opts=opts).end[0]

        n0 = winding_number(y0_of, region)
        w = profile.spread
        for a, b in ((profile.Umin - 2 * w, profile.Umin - 1e-4 * w),
                     (profile.Umax + 1e-4 * w, profile.Umax + 2 * w)):
            vals = [y0_of(x).real for x in np.linspace(a, b, 41)]
            n0 += int(np.sum(np.diff(np.sign(vals)) != 0))
        if n0 != 0:
            raise PreconditionUnverified(
                f"y_-(k, ., 0) has {n0} zeros in the semicircle disk at k={k}")
    h = profile.h
    mu = rayleigh.mu_of(k)
    if panels is None:
        panels = int(math.ceil(4.0 * h / mu)) + 8
    # breakpoints graded geometrically towards x2 = 0
    t = np.linspace(0.0, 1.0, panels + 1)
    gamma = 3.0
    brk = -h * (1.0 - t) ** gamma
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    total = 0j
    for a, b in zip(brk[:-1], brk[1:]):
        xs = 0.5 * (b - a) * gx + 0.5 * (a + b)
        ws = 0.5 * (b - a) * gw
        for x, w in zip(xs, ws):
            cp = float(profile.U(x))
            sol = rayleigh.solve_limit(profile, k, cp, opts=opts)
            y0, _, ls = sol.end
            yc = sol.critical.y_at_xc.real
            ratio = (yc / abs(y0)) ** 2 * math.exp(2.0 * (sol.critical.log_scale - ls))
            # (1/pi) Y_I dc' / (c' - c) with dc' = U' dx2
            total += w * float(profile.U2(x)) * ratio / (cp - c)
    Y = eval_Y(profile, k, c, opts)
    kcoth = 1.0 / h if k == 0 else k / math.tanh(k * h)
    return float(abs(Y - total - kcoth))


def scan(profile: ShearProfile, g: float, sigma: float, ks, cs,
         opts: SolverOptions = DEFAULT, map_fn=map) -> list[DispersionSample]:
    """Evaluate on the product grid ks x cs (row-major in k)."""
    pts = [(float(k), complex(c)) for k in ks for c in cs]
    return list(map_fn(lambda kc: eval_F(profile, g, sigma, kc[0], kc[1], opts), pts))


def write_scan_csv(samples, path) -> None:
    """Columns k, c_R, c_I, ReF, ImF (F includes -sigma k^2)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "c_R", "c_I", "ReF", "ImF"])
        for s in samples:
            F = s.F_sigma
            w.writerow([repr(s.k), repr(s.c.real), repr(s.c.imag),
                        repr(float(F.real)), repr(float(F.imag))])


def critical_point(profile: ShearProfile, c: float) -> float:
    return invert(profile, c)
