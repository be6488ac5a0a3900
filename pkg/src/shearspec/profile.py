"""Monotone shear profiles U(x2) on [-h, 0].

A profile is a closed-form expression in ``x2``.  Derivatives up to order
four are symbolic; the same expression is used unchanged on the extended
interval ``[-h - h0, h0]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import NotMonotone, NotSmoothEnough, OutOfRange, ParseError

N_GRID = 4097


@dataclass(frozen=True)
class Inflection:
    x20: float
    c0: float
    sign_U3: int  # sign of U'''(x20); 0 when degenerate


@dataclass(frozen=True)
class Interval3Split:
    """Critical zone I2 = (x2l, x2r); I1 and I3 are its complements in [-h, 0]."""

    x2l: float | None
    x2r: float | None
    mu: float
    rho0: float

    @property
    def empty(self) -> bool:
        return self.x2l is None


@dataclass(frozen=True, eq=False)
class ShearProfile:
    text: str
    tree: tuple
    h: float
    h0: float
    m: float  # inf U' on the extended interval
    m_int: float  # inf U' on [-h, 0]
    sup_U1: float  # sup U' on the extended interval
    sup_U2: float  # sup |U''| on [-h, 0]
    Umin: float
    Umax: float
    inflections: tuple[Inflection, ...]
    degenerate_zeros: tuple[float, ...]
    derivs: tuple = field(repr=False)
    program: tuple = field(repr=False)

    # -- evaluation
    def U(self, x):
        return ex.evaluate(self.tree, x)

    def d(self, order: int, x):
        """Derivative of order 0..4 (symbolic)."""
        return ex.evaluate(self.derivs[order], x)

    def U1(self, x):
        return self.d(1, x)

    def U2(self, x):
        return self.d(2, x)

    def U3(self, x):
        return self.d(3, x)

    def U4(self, x):
        return self.d(4, x)

    def taylor(self, x0: complex, n: int) -> np.ndarray:
        return ex.taylor(self.tree, x0, n)

    @property
    def spread(self) -> float:
        return self.Umax - self.Umin

    @property
    def rho0(self) -> float:
        return 4.0 / (self.h0 * self.m)

    @property
    def tol_inflect(self) -> float:
        return 1e-10 * self.sup_U2

    @property
    def extended(self) -> tuple[float, float]:
        return (-self.h - self.h0, self.h0)

    def __str__(self) -> str:
        return f"U(x2) = {self.text} on [{-self.h:g}, 0]"


def parse_profile(text: str, h: float) -> ShearProfile:
    """Parse, validate and analyse a profile.

    Raises
    ------
    ParseError, NotMonotone, NotSmoothEnough
    """
    h = float(h)
    if not (h > 0 and math.isfinite(h)):
        raise ParseError(f"depth h must be positive, got {h}")
    tree = ex.parse(text)
    derivs = [tree]
    for _ in range(4):
        derivs.append(ex.diff(derivs[-1]))
    derivs = tuple(derivs)

    def ev(order, x):
        with np.errstate(all="ignore"):
            return np.asarray(ex.evaluate(derivs[order], x), dtype=float)

    x_int = np.linspace(-h, 0.0, N_GRID)
    vals = [ev(j, x_int) for j in range(5)]
    for j, v in enumerate(vals):
        bad = ~np.isfinite(v)
        if bad.any():
            raise NotSmoothEnough(
                f"derivative {j} is not finite at x2 = {x_int[bad][0]:.12g}")
    u1 = vals[1]
    if (u1 <= 0).any():
        i = int(np.argmin(u1))
        raise NotMonotone(float(x_int[i]), float(u1[i]))
    m_int = float(u1.min())
    sup_U2 = float(np.abs(vals[2]).max())
    h0 = h / 2 if sup_U2 == 0 else min(h / 2, m_int / (4.0 * sup_U2))

    x_ext = np.linspace(-h - h0, h0, 2 * N_GRID - 1)
    ext = [ev(j, x_ext) for j in range(5)]
    for j, v in enumerate(ext):
        bad = ~np.isfinite(v)
        if bad.any():
            raise NotSmoothEnough(
                f"derivative {j} is not finite at x2 = {x_ext[bad][0]:.12g} "
                "in the extension")
    if (ext[1] <= 0).any():
        i = int(np.argmin(ext[1]))
        raise NotMonotone(float(x_ext[i]), float(ext[1][i]))
    m = float(ext[1].min())
    # extension bounds: U' >= m_int/2 and the C^3 norm of U' at most doubles
    norm_int = max(float(np.abs(v).max()) for v in vals[1:])
    norm_ext = max(float(np.abs(v).max()) for v in ext[1:])
    if m < 0.5 * m_int or norm_ext > 2.0 * norm_int:
        raise NotSmoothEnough(
            "the analytic extension violates the bounds U' >= inf U'/2 "
            "or |U'|_C3 <= 2|U'|_C3 on the extended interval")

    inflections, degenerate = _find_inflections(derivs, x_int, vals[2], sup_U2)
    prog = ex.compile_program(tree)
    return ShearProfile(
        text=text.strip(), tree=tree, h=h, h0=h0, m=m, m_int=m_int, sup_U1=float(ext[1].max()),
        sup_U2=sup_U2, Umin=float(vals[0][0]), Umax=float(vals[0][-1]),
        inflections=tuple(inflections), degenerate_zeros=tuple(degenerate),
        derivs=derivs, program=prog)


def _find_inflections(derivs, x, u2, sup_U2):
    if sup_U2 == 0.0:
        return [], []
    tol = 1e-10 * sup_U2
    sgn = np.where(np.abs(u2) <= tol, 0, np.sign(u2)).astype(int)
    nz = np.flatnonzero(sgn)
    f2 = lambda t: float(ex.evaluate(derivs[2], t))
    found, degenerate = [], []
    for i, j in zip(nz[:-1], nz[1:]):
        a, b = float(x[i]), float(x[j])
        if sgn[i] != sgn[j]:
            fa = f2(a)
            while b - a > 1e-12:
                mid = 0.5 * (a + b)
                fm = f2(mid)
                if fm == 0.0:
                    a = b = mid
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            x20 = 0.5 * (a + b)
            u3 = float(ex.evaluate(derivs[3], x20))
            s3 = 0 if abs(u3) <= tol else int(np.sign(u3))
            found.append(Inflection(x20, float(ex.evaluate(derivs[0], x20)), s3))
        elif j > i + 1:
            degenerate.append(float(x[(i + j) // 2]))
    if degenerate:
        warnings.warn(
            f"U'' has non-sign-changing zeros near {degenerate}; they are not "
            "treated as inflection points", stacklevel=3)
    return found, degenerate


def invert(profile: ShearProfile, c: float) -> float:
    """The unique x2 in the extended interval with U(x2) = c.

    Safeguarded Newton on a shrinking bracket.
    """
    c = float(np.real(c))
    lo, hi = profile.extended
    ulo, uhi = float(profile.U(lo)), float(profile.U(hi))
    if not (ulo <= c <= uhi):
        raise OutOfRange(f"c = {c:.12g} is outside U([{lo:.6g}, {hi:.6g}]) = "
                         f"[{ulo:.12g}, {uhi:.12g}]")
    if c == ulo:
        return lo
    if c == uhi:
        return hi
    tol = 1e-13 * max(profile.spread, 1e-300)
    # initial guess by linear interpolation
    x = lo + (hi - lo) * (c - ulo) / (uhi - ulo)
    for _ in range(200):
        fx = float(profile.U(x)) - c
        if abs(fx) < tol:
            return x
        if fx > 0:
            hi = x
        else:
            lo = x
        step = fx / float(profile.U1(x))
        xn = x - step
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x or hi - lo < 4e-16 * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def invert_complex(profile: ShearProfile, c: complex) -> complex:
    """Complex root s of U(s) = c near the real interval (Newton)."""
    c = complex(c)
    lo, hi = profile.extended
    ulo, uhi = float(profile.U(lo)), float(profile.U(hi))
    cr = min(max(c.real, ulo), uhi)
    x = invert(profile, cr)
    s = complex(x, c.imag / float(profile.U1(x)))
    s += (c.real - cr) / float(profile.U1(x))
    for _ in range(60):
        with np.errstate(all="ignore"):
            f = complex(profile.U(s)) - c
            df = complex(profile.U1(s))
        if not np.isfinite(f) or df == 0:
            break
        ds = f / df
        s -= ds
        if abs(ds) < 1e-15 * max(1.0, abs(s)):
            break
    return s


def split_intervals(profile: ShearProfile, k: float, c: complex) -> Interval3Split:
    """Critical zone where 1/|U - c| exceeds rho0 * mu^(-3/2)."""
    mu = 1.0 / math.sqrt(1.0 + float(k) ** 2)
    rho0 = profile.rho0
    eps = mu ** 1.5 / rho0
    c = complex(c)
    if abs(c.imag) >= eps:
        return Interval3Split(None, None, mu, rho0)
    w = math.sqrt(eps * eps - c.imag * c.imag)
    a, b = c.real - w, c.real + w
    if b <= profile.Umin or a >= profile.Umax:
        return Interval3Split(None, None, mu, rho0)
    xl = -profile.h if a <= profile.Umin else invert(profile, a)
    xr = 0.0 if b >= profile.Umax else invert(profile, b)
    return Interval3Split(xl, xr, mu, rho0)
