"""Eigenvalue counting and branch continuation in the c-plane.

Counting uses the winding number of the entire function Fbold(k, .)
(no poles at channel eigenvalues).  Root polishing and continuation use
the scale-free F(k, .), continued analytically across the segment from
c_I > 0 so that branches can be followed up to and through the points
where they touch U([-h, 0]).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import contour, modes
from .contour import Region, semicircle_region, winding_number
from .dispersion import eval_F
from .errors import (ContourThroughZero, DegenerateRoot, LostRoot, NumericalError,
                     PreconditionFailed, SeedDiverged)
from .profile import ShearProfile
from .rayleigh import DEFAULT, SolverOptions

BRANCH_TOL = 1e-9
SIMPLE_TOL = 1e-8
STEP_MIN = 1e-5
STEP_MAX = 0.1
FD_STEP = 1e-6
MAX_DEPTH = 12


def _delta(profile: ShearProfile) -> float:
    return 1e-4 * profile.spread


# --------------------------------------------------------------- index

def Fbold_function(profile: ShearProfile, g: float, sigma: float, k: float,
                   opts: SolverOptions = DEFAULT):
    """c -> mantissa of Fbold_sigma(k, c); its argument is that of Fbold."""
    def f(c):
        return eval_F(profile, g, sigma, k, c, opts).Fbold_sigma
    return f


def index_count(profile: ShearProfile, g: float, sigma: float, k: float,
                region: Region | None = None, opts: SolverOptions = DEFAULT,
                map_fn=map) -> int:
    """Number of modes inside ``region`` (default: upper semicircle with margin)."""
    delta = _delta(profile)
    if region is None:
        region = semicircle_region(profile, delta)
    f = Fbold_function(profile, g, sigma, k, opts)
    last = None
    for amount in (0.0, delta, -0.5 * delta, 2.0 * delta, -delta):
        try:
            return winding_number(f, region.resized(amount) if amount else region,
                                  map_fn=map_fn)
        except ContourThroughZero as exc:
            last = exc
    raise last


# -------------------------------------------------------------- Newton

@dataclass(frozen=True)
class Root:
    k: float
    c: complex
    F: complex
    dFdc: complex
    iterations: int


def _F(profile, g, sigma, k, c, opts):
    return eval_F(profile, g, sigma, k, c, opts, continuation=True).F_sigma


def dF_dc(profile, g, sigma, k, c, opts=DEFAULT, step=None):
    """Central difference along the real direction (F is analytic in c)."""
    eta = step or FD_STEP * max(profile.spread, abs(c))
    return (_F(profile, g, sigma, k, c + eta, opts)
            - _F(profile, g, sigma, k, c - eta, opts)) / (2.0 * eta)


def newton(profile: ShearProfile, g: float, sigma: float, k: float, c: complex,
           maxit: int = 8, opts: SolverOptions = DEFAULT, tol: float = 1e-13) -> Root:
    """Complex Newton on F_sigma(k, .) from c.  Raises LostRoot."""
    c = complex(c)
    scale = max(profile.spread, abs(c))
    for it in range(1, maxit + 1):
        F = _F(profile, g, sigma, k, c, opts)
        d = dF_dc(profile, g, sigma, k, c, opts)
        if d == 0 or not np.isfinite(d) or not np.isfinite(F):
            raise LostRoot(f"Newton broke down at k={k}, c={c}")
        dc = F / d
        c = c - dc
        if abs(dc) <= tol * scale:
            F = _F(profile, g, sigma, k, c, opts)
            return Root(float(k), c, F, d, it)
    raise LostRoot(f"Newton did not converge in {maxit} steps at k={k}, c={c}")


# --------------------------------------------------------------- seeds

def k_seed(profile: ShearProfile, g: float) -> float:
    return 50.0 * max(1.0, float(profile.U1(0.0)) ** 2 / g)


def seed_guess(profile: ShearProfile, g: float, k: float) -> tuple[float, float]:
    """Large-k expansions of c^+ and c^-."""
    k = abs(float(k))
    U0, U1 = float(profile.U(0.0)), float(profile.U1(0.0))
    r = math.sqrt(g / k * (1.0 + U1 * U1 / (4.0 * g * k)))
    base = U0 - U1 / (2.0 * k)
    return base + r, base - r


def seed_large_k(profile: ShearProfile, g: float, k: float,
                 opts: SolverOptions = DEFAULT, check_k: bool = True) -> tuple[Root, Root]:
    """Polished (c^+, c^-) at large k; each must converge in at most 8 steps."""
    if check_k and abs(k) < k_seed(profile, g):
        raise ValueError(f"k = {k} is below k_seed = {k_seed(profile, g)}")
    out = []
    for guess in seed_guess(profile, g, k):
        try:
            out.append(newton(profile, g, 0.0, k, guess, maxit=8, opts=opts))
        except LostRoot as exc:
            raise SeedDiverged(f"seed at k={k} did not polish: {exc}") from exc
    return out[0], out[1]


@dataclass(frozen=True)
class WeakMode:
    k: float
    c: complex
    resolved: bool  # |Im c| above 1e2 machine epsilon |c|


def weak_mode(profile: ShearProfile, g: float, k: float, c_guess: float,
              opts: SolverOptions = DEFAULT) -> WeakMode:
    """A mode with c_R in the segment and exponentially small c_I.

    c_R solves Re F(k, c_R) = 0 on the segment; c_I follows from first-order
    perturbation, c_I = -Im F / d_c Re F, with Im F = Y_I (U(0) - c_R)^2 from
    the closed formula for Y_I (free of the cancellation in Im(y'/y)).
    """
    from .dispersion import eval_YI_formula

    f = lambda x: _F(profile, g, 0.0, k, x, opts).real
    x = float(c_guess)
    for _ in range(50):
        hc = FD_STEP * profile.spread
        d = (f(x + hc) - f(x - hc)) / (2 * hc)
        dx = f(x) / d
        x -= dx
        if abs(dx) < 1e-14 * max(1.0, abs(x)):
            break
    else:
        raise LostRoot(f"weak mode at k={k} did not converge")
    U0 = float(profile.U(0.0))
    FI = eval_YI_formula(profile, k, x, opts) * (U0 - x) ** 2
    cI = -FI / d
    eps = np.finfo(float).eps
    return WeakMode(float(k), complex(x, cI), bool(abs(cI) > 1e2 * eps * abs(complex(x, cI))))


# ------------------------------------------------------------ branches

class Termination(enum.Enum):
    REACHED_SEGMENT = "reached_segment"
    COLLISION = "collision"
    K_RANGE_END = "k_range_end"
    INDEX_LOST = "index_lost"


@dataclass(frozen=True)
class BranchPoint:
    k: float
    c: complex
    dFdc: complex
    absF: float


@dataclass
class Branch:
    label: str
    points: list[BranchPoint] = field(default_factory=list)
    termination: Termination | None = None
    c_end: complex | None = None
    k_end: float | None = None

    @property
    def k(self) -> np.ndarray:
        return np.array([p.k for p in self.points])

    @property
    def c(self) -> np.ndarray:
        return np.array([p.c for p in self.points])

    def termination_text(self) -> str:
        if self.termination is None:
            return ""
        t = self.termination.value
        if self.termination is Termination.REACHED_SEGMENT and self.c_end is not None:
            t += f"({self.k_end!r},{self.c_end.real!r})"
        return t


def on_segment(profile, c: complex) -> bool:
    return c.imag <= 0.0 and profile.Umin <= c.real <= profile.Umax


def _segment_root(profile, g, sigma, k, c_r, opts, maxit=30):
    """Solve F_sigma(k, c_R) = 0 for real (k, c_R) on the segment (2x2 Newton)."""
    x = np.array([float(k), float(c_r)])
    for _ in range(maxit):
        F = _F(profile, g, sigma, x[0], x[1], opts)
        hk = FD_STEP * max(1.0, abs(x[0]))
        hc = FD_STEP * profile.spread
        Fk = (_F(profile, g, sigma, x[0] + hk, x[1], opts)
              - _F(profile, g, sigma, x[0] - hk, x[1], opts)) / (2 * hk)
        lo, hi = x[1] - hc, x[1] + hc
        if lo < profile.Umin:
            lo, hi = x[1], x[1] + 2 * hc
        Fc = (_F(profile, g, sigma, x[0], hi, opts)
              - _F(profile, g, sigma, x[0], lo, opts)) / (hi - lo)
        J = np.array([[Fk.real, Fc.real], [Fk.imag, Fc.imag]])
        dx = np.linalg.solve(J, [F.real, F.imag])
        x = x - dx
        x[1] = min(max(x[1], profile.Umin), profile.Umax)
        if abs(dx[0]) < 1e-12 * max(1.0, abs(x[0])) and abs(dx[1]) < 1e-12 * profile.spread:
            return float(x[0]), float(x[1])
    raise LostRoot("endpoint on the segment did not converge")


def _endpoint(profile, g, sigma, p_prev: BranchPoint, k_new, c_new, opts):
    """Where the branch meets U([-h, 0]) between p_prev and (k_new, c_new)."""
    tiny = 1e-10 * profile.spread
    outside = lambda c: not (profile.Umin <= c.real <= profile.Umax)
    if (p_prev.c.imag == 0.0 and c_new.imag == 0.0) or (
            abs(c_new.imag) <= tiny and outside(c_new)):
        # the branch passes through an end of the segment
        ref = c_new.real if outside(c_new) else p_prev.c.real
        ce = profile.Umin if abs(ref - profile.Umin) <= abs(ref - profile.Umax) \
            else profile.Umax
        f = lambda kk: _F(profile, g, sigma, kk, ce, opts).real
        a, b = sorted((p_prev.k, k_new))
        fa, fb = f(a), f(b)
        w = b - a
        while fa * fb > 0 and w < 10.0:
            w *= 2.0
            a, b = a - w / 2, b + w / 2
            a = max(a, 0.0)
            fa, fb = f(a), f(b)
        ke = brentq(f, a, b, xtol=1e-14)
        return ke, complex(ce)
    t = p_prev.c.imag / (p_prev.c.imag - c_new.imag) if p_prev.c.imag != c_new.imag else 0.5
    k0 = p_prev.k + t * (k_new - p_prev.k)
    cr = p_prev.c.real + t * (c_new.real - p_prev.c.real)
    cr = min(max(cr, profile.Umin), profile.Umax)
    ke, ce = _segment_root(profile, g, sigma, k0, cr, opts)
    return ke, complex(ce)


def trace_branch(profile: ShearProfile, g: float, sigma: float, seed: tuple[float, complex],
                 k_target: float, label: str = "c_plus", step: float = 0.01,
                 step_max: float = STEP_MAX, through: bool = True,
                 opts: SolverOptions = DEFAULT, max_points: int = 100000) -> Branch:
    """Natural-parameter continuation in k from a root ``seed`` to ``k_target``.

    A seed on the segment starts along the local bifurcation slope into
    c_I > 0.  When the branch reaches the segment it terminates there,
    unless ``through`` is set and the continued root enters c_I > 0 on the
    other side.
    """
    k, c = float(seed[0]), complex(seed[1])
    direction = 1.0 if k_target >= k else -1.0
    br = Branch(label)
    step = min(max(step, STEP_MIN), step_max)
    if c.imag == 0.0 and profile.Umin <= c.real <= profile.Umax:
        start = _leave_segment(profile, g, sigma, k, c, direction, step, opts)
        if start is None:
            br.points.append(BranchPoint(k, c, dF_dc(profile, g, sigma, k, c, opts),
                                         abs(_F(profile, g, sigma, k, c, opts))))
            br.termination = Termination.REACHED_SEGMENT
            br.k_end, br.c_end = k, c
            return br
        d = dF_dc(profile, g, sigma, k, c, opts)
        br.points.append(BranchPoint(k, c, d, abs(_F(profile, g, sigma, k, c, opts))))
        k, c = start.k, start.c
        br.points.append(BranchPoint(k, c, start.dFdc, abs(start.F)))
    else:
        r = newton(profile, g, sigma, k, c, maxit=12, opts=opts)
        if abs(r.dFdc) < SIMPLE_TOL:
            raise DegenerateRoot(f"seed at k={k} is not a simple root")
        c = r.c
        br.points.append(BranchPoint(k, c, r.dFdc, abs(r.F)))
    easy = 0
    while len(br.points) < max_points:
        if (k_target - k) * direction <= 1e-14 * max(1.0, abs(k)):
            br.termination = Termination.K_RANGE_END
            return br
        dk = direction * min(step, abs(k_target - k))
        k_new = k + dk
        if len(br.points) >= 2:
            p0, p1 = br.points[-2], br.points[-1]
            c_pred = p1.c + (p1.c - p0.c) * (dk / (p1.k - p0.k))
        else:
            c_pred = c
        try:
            r = newton(profile, g, sigma, k_new, c_pred, maxit=8, opts=opts)
            jump = abs(r.c - c_pred)
            if jump > 0.05 * profile.spread + 10.0 * abs(c_pred - c):
                raise LostRoot("corrector jumped to another root")
        except (LostRoot, NumericalError):
            step *= 0.5
            easy = 0
            if step < STEP_MIN:
                if _near_segment(profile, c):
                    return _finish_at_segment(profile, g, sigma, br, k_new, c_pred, opts,
                                              through, direction, k_target, step_max, label)
                raise LostRoot(f"branch {label} lost at k={k}, c={c}")
            continue
        c_new = r.c
        if abs(r.dFdc) < SIMPLE_TOL:
            br.points.append(BranchPoint(k_new, c_new, r.dFdc, abs(r.F)))
            br.termination = Termination.COLLISION
            return br
        prev = br.points[-1]
        entered = (_crossed_into_segment(profile, prev.c, c_new))
        if entered:
            return _finish_at_segment(profile, g, sigma, br, k_new, c_new, opts,
                                      through, direction, k_target, step_max, label)
        br.points.append(BranchPoint(k_new, c_new, r.dFdc, abs(r.F)))
        k, c = k_new, c_new
        if r.iterations <= 3:
            easy += 1
            if easy >= 4:
                step = min(2.0 * step, step_max)
                easy = 0
        else:
            easy = 0
    br.termination = Termination.K_RANGE_END
    return br


def _near_segment(profile, c):
    w = 1e-2 * profile.spread
    return (profile.Umin - w <= c.real <= profile.Umax + w) and abs(c.imag) < w


def _crossed_into_segment(profile, c_old: complex, c_new: complex) -> bool:
    inside_old = profile.Umin <= c_old.real <= profile.Umax
    inside_new = profile.Umin <= c_new.real <= profile.Umax
    tiny = 1e-10 * profile.spread
    if c_old.imag == 0.0 and c_new.imag == 0.0:
        return inside_new and not inside_old
    if inside_old and not inside_new and abs(c_new.imag) <= tiny:
        # a complex branch collapsing onto the real axis past an end
        return True
    if (c_old.imag > 0.0) != (c_new.imag > 0.0) or (c_old.imag < 0.0) != (c_new.imag < 0.0):
        return profile.Umin - 1e-9 <= c_new.real <= profile.Umax + 1e-9
    return False


def _leave_segment(profile, g, sigma, k, c, direction, step, opts):
    """First off-segment root after the segment point (k, c), if the
    continued branch enters the upper half plane."""
    try:
        bs = bifurcation_slope(profile, g, sigma, k, c.real, opts)
    except (DegenerateRoot, NumericalError):
        return None
    floor = 1e-13 * profile.spread
    dk = direction * step
    for _ in range(12):
        c_pred = c + bs.slope * dk
        try:
            r = newton(profile, g, sigma, k + dk, c_pred, maxit=12, opts=opts)
        except (LostRoot, NumericalError):
            dk *= 0.5
            continue
        if abs(r.c - c) > 0.1 * profile.spread + 4 * abs(bs.slope * dk):
            dk *= 0.5
            continue
        if r.c.imag > floor:
            return r
        return None
    return None


def _finish_at_segment(profile, g, sigma, br, k_new, c_new, opts, through,
                       direction, k_target, step_max, label):
    prev = br.points[-1]
    ke, ce = _endpoint(profile, g, sigma, prev, k_new, c_new, opts)
    br.points.append(BranchPoint(ke, ce, dF_dc(profile, g, sigma, ke, ce, opts),
                                 abs(_F(profile, g, sigma, ke, ce, opts))))
    if through and (k_target - ke) * direction > 0:
        start = _leave_segment(profile, g, sigma, ke, ce, direction,
                               min(0.01, step_max), opts)
        if start is not None:
            rest = trace_branch(profile, g, sigma, (start.k, start.c), k_target, label,
                                step=min(0.01, step_max), step_max=step_max,
                                through=through, opts=opts)
            br.points.extend(rest.points)
            br.termination = rest.termination
            br.c_end, br.k_end = rest.c_end, rest.k_end
            return br
    br.termination = Termination.REACHED_SEGMENT
    br.k_end, br.c_end = ke, ce
    return br


def write_branch_csv(branches, path) -> None:
    """Columns k, Re c, Im c, |F|, |dF/dc|, label, termination (last row only)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "Re c", "Im c", "|F|", "|dF/dc|", "label", "termination"])
        for b in branches:
            n = len(b.points)
            for i, p in enumerate(b.points):
                w.writerow([repr(p.k), repr(p.c.real), repr(p.c.imag), repr(p.absF),
                            repr(abs(p.dFdc)), b.label,
                            b.termination_text() if i == n - 1 else ""])


# ---------------------------------------------------------- bifurcation

@dataclass(frozen=True)
class BifurcationSlope:
    k0: float
    c0: float
    dFdk: float
    dFdcR: complex
    slope: complex
    im_slope_sign: int


def bifurcation_slope(profile: ShearProfile, g: float, sigma: float, k0: float,
                      c0: float, opts: SolverOptions = DEFAULT) -> BifurcationSlope:
    """C'(k0) = -d_k F_sigma / d_{c_R} F at a segment root (k0, c0)."""
    c0 = float(c0)
    F0 = _F(profile, g, sigma, k0, c0, opts)
    if abs(F0) > 1e-6 * max(1.0, g):
        raise DegenerateRoot(f"(k0, c0) = ({k0}, {c0}) is not a root: |F| = {abs(F0)}")
    hk = FD_STEP * max(1.0, abs(k0))
    if k0 - hk < 0:
        Fk = 0.0  # F is even in k
    else:
        Fk = (_F(profile, g, sigma, k0 + hk, c0, opts)
              - _F(profile, g, sigma, k0 - hk, c0, opts)).real / (2 * hk)
    hc = FD_STEP * profile.spread
    if c0 - hc < profile.Umin:
        # one-sided, second order, along the segment
        f1 = _F(profile, g, sigma, k0, c0 + hc, opts)
        f2 = _F(profile, g, sigma, k0, c0 + 2 * hc, opts)
        Fc = (-3.0 * F0 + 4.0 * f1 - f2) / (2 * hc)
    elif c0 + hc > profile.Umax:
        f1 = _F(profile, g, sigma, k0, c0 - hc, opts)
        f2 = _F(profile, g, sigma, k0, c0 - 2 * hc, opts)
        Fc = (3.0 * F0 - 4.0 * f1 + f2) / (2 * hc)
    else:
        Fc = (_F(profile, g, sigma, k0, c0 + hc, opts)
              - _F(profile, g, sigma, k0, c0 - hc, opts)) / (2 * hc)
    if abs(Fc) < SIMPLE_TOL:
        raise DegenerateRoot(f"d_cR F vanishes at ({k0}, {c0})")
    slope = -Fk / Fc
    im = Fk * Fc.imag / abs(Fc) ** 2
    return BifurcationSlope(float(k0), c0, float(Fk), complex(Fc), complex(slope),
                            int(np.sign(im)) if abs(im) > 1e-6 * abs(slope) else 0)


# --------------------------------------------------------------- census

@dataclass
class ModeCensus:
    k: float
    unstable: list[complex]
    neutral_nonsingular: list[float]
    singular_neutral: list[float]
    index_upper: int
    multiple: list[tuple[complex, int]] = field(default_factory=list)
    flagged: list[str] = field(default_factory=list)

    def modes(self) -> list[complex]:
        return (list(self.unstable) + [complex(c) for c in self.neutral_nonsingular]
                + [complex(c) for c in self.singular_neutral])


SPLIT = (0.5, 0.4871, 0.5257)


def _locate(profile, g, sigma, k, rect: Region, count: int, depth, opts, out, map_fn):
    if count == 0:
        return
    (z0, z1) = rect.params
    if count == 1:
        mid = 0.5 * (z0 + z1)
        try:
            r = newton(profile, g, sigma, k, mid, maxit=30, opts=opts)
            if rect.contains(r.c):
                out["roots"].append(r.c)
                return
        except (LostRoot, NumericalError):
            pass
    if depth >= MAX_DEPTH:
        if count == 1:
            out["roots"].append(0.5 * (z0 + z1))
            out["flagged"].append(f"unpolished root near {0.5 * (z0 + z1)}")
        else:
            out["multiple"].append((0.5 * (z0 + z1), count))
        return
    f = Fbold_function(profile, g, sigma, k, opts)
    for frac in SPLIT:
        xm = z0.real + frac * (z1.real - z0.real)
        ym = z0.imag + frac * (z1.imag - z0.imag)
        cells = [contour.rectangle(complex(z0.real, z0.imag), complex(xm, ym)),
                 contour.rectangle(complex(xm, z0.imag), complex(z1.real, ym)),
                 contour.rectangle(complex(z0.real, ym), complex(xm, z1.imag)),
                 contour.rectangle(complex(xm, ym), complex(z1.real, z1.imag))]
        try:
            counts = [winding_number(f, cell, map_fn=map_fn) for cell in cells]
        except ContourThroughZero:
            continue
        if sum(counts) == count:
            break
    else:
        out["flagged"].append(f"cell {z0}..{z1} could not be split")
        out["multiple"].append((0.5 * (z0 + z1), count))
        return
    for cell, n in zip(cells, counts):
        _locate(profile, g, sigma, k, cell, n, depth + 1, opts, out, map_fn)


def _real_roots(profile, g, sigma, k, opts, n=200):
    """Real modes outside the segment in a window of width 3 (Umax - Umin)."""
    w = profile.spread
    d = _delta(profile)
    f = lambda c: float(eval_F(profile, g, sigma, k, c, opts).Fbold_sigma.real)
    roots = []
    for a, b in ((profile.Umin - w, profile.Umin - d), (profile.Umax + d, profile.Umax + w)):
        xs = np.linspace(a, b, n + 1)
        vals = [f(x) for x in xs]
        for x0, x1, f0, f1 in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
            if f0 == 0.0:
                roots.append(float(x0))
            elif f0 * f1 < 0:
                roots.append(brentq(f, x0, x1, xtol=1e-15))
        if vals[-1] == 0.0:
            roots.append(float(xs[-1]))
    return sorted(roots)


def mode_census(profile: ShearProfile, g: float, sigma: float, k: float,
                opts: SolverOptions = DEFAULT, map_fn=map,
                singular_tol: float = 1e-8) -> ModeCensus:
    k = float(k)
    idx = index_count(profile, g, sigma, k, opts=opts, map_fn=map_fn)
    out = {"roots": [], "multiple": [], "flagged": []}
    if idx > 0:
        center = 0.5 * (profile.Umin + profile.Umax)
        R = 0.5 * profile.spread + _delta(profile)
        rect = contour.rectangle(complex(center - R, _delta(profile)), complex(center + R, R))
        f = Fbold_function(profile, g, sigma, k, opts)
        n_rect = winding_number(f, rect, map_fn=map_fn)
        _locate(profile, g, sigma, k, rect, n_rect, 0, opts, out, map_fn)
    unstable = sorted(out["roots"], key=lambda z: (z.real, z.imag))
    real = _real_roots(profile, g, sigma, k, opts)
    singular = []
    cands = [profile.Umin] + [inf.c0 for inf in profile.inflections]
    for c in cands:
        try:
            if abs(_F(profile, g, sigma, k, c, opts)) < singular_tol:
                singular.append(float(c))
        except NumericalError:
            pass
    flagged = out["flagged"]
    if k >= k_seed(profile, g) and sigma == 0.0:
        _, guess = seed_guess(profile, g, k)
        if profile.Umin < guess < profile.Umax:
            try:
                wm = weak_mode(profile, g, k, guess, opts)
                if not wm.resolved:
                    flagged.append(f"c_minus sub-resolution at c_R={wm.c.real!r}, "
                                   f"sign of c_I predicted {int(np.sign(wm.c.imag)):+d}")
                elif wm.c.imag > 0 and all(abs(z - wm.c) > 1e-8 for z in unstable):
                    flagged.append(f"weak unstable c_minus={wm.c!r} below the contour margin")
            except NumericalError:
                pass
    return ModeCensus(k, unstable, real, singular, idx, out["multiple"], flagged)


def write_census_csv(censuses, path) -> None:
    """Columns k, n_unstable, index, modes ("re:im" pairs joined by ';')."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "n_unstable", "index", "modes"])
        for cz in censuses:
            modes_txt = ";".join(f"{c.real!r}:{c.imag!r}" for c in cz.modes())
            w.writerow([repr(cz.k), len(cz.unstable), cz.index_upper, modes_txt])


def in_semicircle(profile: ShearProfile, c: complex, slack: float = 1e-8) -> bool:
    center = 0.5 * (profile.Umax + profile.Umin)
    R = 0.5 * profile.spread
    return (c.real - center) ** 2 + c.imag ** 2 <= R * R + slack


# ------------------------------------------------------ low-k branch

def closed_low_k_branch(profile: ShearProfile, g: float, c0: float,
                        opts: SolverOptions = DEFAULT, step: float = 0.01,
                        step_max: float = 0.02) -> Branch | None:
    """The even branch with C(+-k1) = c0 and Im C > 0 for |k| < k1.

    Returns None when g <= F0(c0) (no k1).
    """
    inf = modes._inflection_for(profile, c0)
    if inf.sign_U3 >= 0:
        raise PreconditionFailed("the closed low-k branch needs U'''(x20) < 0")
    F0 = modes.eval_F0(profile, c0, opts)
    if F0 <= 0:
        raise PreconditionFailed(f"F0(c0) = {F0} <= 0: no channel wave number")
    if g <= F0:
        return None
    entry = modes.find_S(profile, g, c0, F0=F0, opts=opts)
    if len(entry.S) < 2:
        return None
    k1 = entry.S[0]
    half = trace_branch(profile, g, 0.0, (k1, complex(c0)), 0.0, "inflection_branch",
                        step=step, step_max=step_max, through=False, opts=opts)
    if len(half.points) < 2 or half.points[1].c.imag <= 0:
        raise PreconditionFailed("no branch leaves (k1, c0) into the upper half plane")
    # F is even in k: mirror the half traced from k1 down to 0
    pts = [BranchPoint(-p.k, p.c, p.dFdc, p.absF) for p in half.points if p.k != 0.0]
    pts += half.points[::-1]
    br = Branch("inflection_branch", pts, Termination.REACHED_SEGMENT, complex(c0), k1)
    return br
