"""Critical wave numbers and singular neutral modes.

k_-      : the wave number making c = U(-h) a neutral mode.
S        : wave numbers making an inflection value c0 a neutral mode,
           found both by shooting and as the non-positive eigenvalues
           lambda = -k^2 of R = -d^2 + U''/(U - c0) with the free-surface
           Robin condition at x2 = 0.
k_C      : the Dirichlet (channel) wave number at c0, if any.
F0(c0)   : F(0, c0) + g, whose sign decides whether k_C exists.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq, minimize_scalar

from . import rayleigh
from .dispersion import eval_F
from .errors import NoRoot, NotInflection, Y0Vanishes
from .profile import Inflection, ShearProfile
from .rayleigh import DEFAULT, SolverOptions

SL_NODES = 2001
ROOT_TOL = 1e-10
GAP_TOL = 1e-4


# ----------------------------------------------------------------- k_-

def F_bottom(profile: ShearProfile, g: float, k: float, sigma: float = 0.0,
             opts: SolverOptions = DEFAULT) -> float:
    """F_sigma(k, U(-h)), real."""
    s = eval_F(profile, g, sigma, abs(k), profile.Umin, opts)
    return float(s.F_sigma.real)


def k_scan_max(profile: ShearProfile, g: float, c: float) -> float:
    """4x the large-k root estimate of F(k, c), capped at 200/h."""
    d = float(profile.U(0.0)) - c
    est = (g + float(profile.U1(0.0)) * d) / (d * d) if d != 0 else 200.0 / profile.h
    return min(4.0 * max(est, 1.0 / profile.h), 200.0 / profile.h)


@dataclass(frozen=True)
class CapillaryRoots:
    g_sharp: float
    k_peak: float
    roots: tuple[float, ...]  # k_#^- <= k_#^+; empty when g > g_sharp


def find_k_minus(profile: ShearProfile, g: float, sigma: float = 0.0,
                 opts: SolverOptions = DEFAULT):
    """k_- for sigma = 0; for sigma > 0 a CapillaryRoots with 0 to 2 roots."""
    if not g > 0:
        raise ValueError("g must be positive")
    f = lambda k: F_bottom(profile, g, k, sigma, opts)
    if sigma == 0.0:
        a, fa = 0.0, -g
        b = max(1.0, 1.0 / profile.h)
        fb = f(b)
        while fb <= 0:
            a, fa = b, fb
            b *= 2.0
            if b > 1e4 / profile.h:
                raise NoRoot("F(k, U(-h)) stays negative")
            fb = f(b)
        return brentq(f, a, b, xtol=1e-14, rtol=1e-15, maxiter=200)
    # F_sigma is concave in K = k^2; F grows like k (U(0) - U(-h))^2
    kmax = max(200.0 / profile.h, 4.0 * profile.spread ** 2 / sigma)
    res = minimize_scalar(lambda K: -f(math.sqrt(K)), bounds=(0.0, kmax ** 2),
                          method="bounded", options={"xatol": 1e-10})
    K = float(res.x)
    peak = -float(res.fun)
    if f(0.0) > peak:
        K, peak = 0.0, f(0.0)
    gs = peak + g
    kp = math.sqrt(K)
    if peak < 0:
        return CapillaryRoots(gs, kp, ())
    if peak == 0:
        return CapillaryRoots(gs, kp, (kp,))
    roots = []
    if f(0.0) < 0:
        roots.append(brentq(f, 0.0, kp, xtol=1e-13))
    hi = max(2.0 * kp, 1.0)
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e5 / profile.h:
            raise NoRoot("F_sigma(k, U(-h)) does not turn negative")
    roots.append(brentq(f, kp, hi, xtol=1e-13))
    return CapillaryRoots(gs, kp, tuple(roots))


# ------------------------------------------------------ Sturm-Liouville

def _inflection_for(profile: ShearProfile, c0: float) -> Inflection:
    for inf in profile.inflections:
        if abs(inf.c0 - c0) <= 1e-9 * max(profile.spread, 1.0):
            return inf
    raise NotInflection(f"c0 = {c0} is not an interior inflection value of {profile.text}")


def potential(profile: ShearProfile, c0: float, x: np.ndarray) -> np.ndarray:
    """U''/(U - c0) with the removable singularity at x20 filled in."""
    inf = _inflection_for(profile, c0)
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        V = np.asarray(profile.U2(x), dtype=float) / (np.asarray(profile.U(x), dtype=float) - c0)
    near = np.abs(x - inf.x20) < 1e-3 * profile.h
    if near.any():
        t = profile.taylor(inf.x20, 10).real
        e = t[1:]  # (U - c0)/tau
        d = np.array([(j + 2) * (j + 1) * t[j + 2] for j in range(1, 9)])  # U''/tau
        for i in np.flatnonzero(near):
            tau = x[i] - inf.x20
            V[i] = np.polyval(d[::-1], tau) / np.polyval(e[:9][::-1], tau)
    return V


def _robin_beta(profile, g, c0):
    d = float(profile.U(0.0)) - c0
    return (float(profile.U1(0.0)) * d + g) / (d * d)


def _sl_matrix(profile, c0, n, beta):
    """Symmetric tridiagonal form on nodes x_1..x_{n-1} (y(-h) = 0 removed).

    beta None gives the Dirichlet problem at x2 = 0.
    """
    x = np.linspace(-profile.h, 0.0, n)
    dx = x[1] - x[0]
    V = potential(profile, c0, x)
    if beta is None:
        diag = 2.0 / dx ** 2 + V[1:-1]
        off = -np.ones(n - 3) / dx ** 2
        return diag, off, x[1:-1]
    diag = 2.0 / dx ** 2 + V[1:]
    off = -np.ones(n - 2) / dx ** 2
    # ghost node from y' = beta y, row weighted by 1/2 and rescaled
    diag[-1] = 2.0 * (1.0 - dx * beta) / dx ** 2 + V[-1]
    off[-1] *= math.sqrt(2.0)
    return diag, off, x[1:]


def _sl_eigs(profile, c0, n, beta, lo, hi):
    diag, off, x = _sl_matrix(profile, c0, n, beta)
    w, v = eigh_tridiagonal(diag, off, select="v", select_range=(lo, hi))
    return w, v, x


@dataclass(frozen=True)
class SLEigen:
    lam: float  # Richardson value
    lam_coarse: float
    lam_fine: float
    k: float  # polished by shooting
    residual: float  # |F(k, c0)| at the polished k
    sign_changes: int  # of the discrete eigenfunction


def _Fbold_real(profile, g, k, c0, opts):
    s = eval_F(profile, g, 0.0, k, c0, opts)
    return float(s.Fbold.real) * math.exp(min(s.log_scale, 600.0))


def _polish(fun, k_est, kmax):
    """Bracket a sign change of ``fun`` around k_est and refine."""
    f0 = fun(k_est)
    if f0 == 0.0:
        return k_est
    w = 1e-3 * max(k_est, 1e-2)
    for _ in range(40):
        a, b = max(k_est - w, 0.0), min(k_est + w, kmax)
        fa, fb = fun(a), fun(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * f0 < 0:
            return brentq(fun, a, k_est, xtol=1e-14, rtol=1e-15)
        if fb * f0 < 0:
            return brentq(fun, k_est, b, xtol=1e-14, rtol=1e-15)
        w *= 2.0
    raise NoRoot(f"no sign change near k = {k_est}")


def sl_negative_eigenvalues(profile: ShearProfile, g: float, c0: float,
                            n: int = SL_NODES, opts: SolverOptions = DEFAULT) -> list[SLEigen]:
    """Non-positive eigenvalues of R with the Robin surface condition,
    Richardson-extrapolated over n and 2n-1 nodes and polished by shooting."""
    _inflection_for(profile, c0)
    beta = _robin_beta(profile, g, c0)
    lam_min = -(50.0 / profile.h) ** 2
    top = 1e-2 / profile.h ** 2  # admits values that cross zero under refinement
    wc, vc, _ = _sl_eigs(profile, c0, n, beta, 1.2 * lam_min, top)
    wf, _, _ = _sl_eigs(profile, c0, 2 * n - 1, beta, 1.2 * lam_min, top)
    m = min(len(wc), len(wf))
    # pair from the top of the spectrum
    wc, vc, wf = wc[len(wc) - m:], vc[:, len(wc) - m:], wf[len(wf) - m:]
    out = []
    kmax = 60.0 / profile.h
    for i, (lc, lf) in enumerate(zip(wc, wf)):
        lam = (4.0 * lf - lc) / 3.0
        if lam > 0.0 or lam < lam_min:
            continue
        k_est = math.sqrt(-lam)
        fun = lambda k: _Fbold_real(profile, g, k, c0, opts)
        try:
            k = _polish(fun, k_est, kmax)
        except NoRoot:
            k = k_est
        res = abs(eval_F(profile, g, 0.0, k, c0, opts).F)
        vec = vc[:, i]
        sc = int(np.sum(np.diff(np.sign(vec[np.abs(vec) > 1e-12 * np.abs(vec).max()])) != 0))
        out.append(SLEigen(float(lam), float(lc), float(lf), float(k), float(res), sc))
    return out


def dirichlet_ground_state(profile: ShearProfile, c0: float, n: int = SL_NODES) -> float:
    """Smallest eigenvalue of R with y(-h) = y(0) = 0 (Richardson)."""
    _inflection_for(profile, c0)
    lams = []
    for m in (n, 2 * n - 1):
        diag, off, _ = _sl_matrix(profile, c0, m, None)
        w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))
        lams.append(float(w[0]))
    return (4.0 * lams[1] - lams[0]) / 3.0


def find_k_C(profile: ShearProfile, c0: float, opts: SolverOptions = DEFAULT) -> float | None:
    """Channel wave number sqrt(-lambda_1), polished on y_-(k, c0, 0) = 0."""
    lam = dirichlet_ground_state(profile, c0)
    if lam >= 0.0:
        return None

    def y0(k):
        sol = rayleigh.solve_limit(profile, k, c0, opts=opts)
        ym, _, ls = sol.end
        return float(ym.real) * math.exp(min(ls, 600.0))

    return _polish(y0, math.sqrt(-lam), 60.0 / profile.h)


def eval_F0(profile: ShearProfile, c0: float, opts: SolverOptions = DEFAULT) -> float:
    """F(0, c0) + g; independent of g."""
    _inflection_for(profile, c0)
    s = eval_F(profile, 1.0, 0.0, 0.0, c0, opts)
    if s.Y is None:
        raise Y0Vanishes(f"y_-(0, c0, 0) vanishes at c0 = {c0} (k_C = 0)")
    return float(s.F.real) + 1.0


# ------------------------------------------------------------------ S

@dataclass(frozen=True)
class InflectionEntry:
    c0: float
    x20: float
    sign_U3: int
    k_C: float | None
    F0: float
    S: tuple[float, ...]
    classification: str
    k0_positive: bool
    marginal: bool = False
    ill_conditioned: bool = False


def find_S(profile: ShearProfile, g: float, c0: float, k_C: float | None = None,
           F0: float | None = None, n_scan: int = 400,
           opts: SolverOptions = DEFAULT) -> InflectionEntry:
    """Roots of F(., c0) on [0, k_max], by sign changes of Fbold (no poles)."""
    inf = _inflection_for(profile, c0)
    if k_C is None:
        k_C = find_k_C(profile, c0, opts)
    if F0 is None:
        try:
            F0 = eval_F0(profile, c0, opts)
        except Y0Vanishes:
            F0 = 0.0
    kmax = k_scan_max(profile, g, c0)
    ks = np.linspace(0.0, kmax, n_scan + 1)
    fun = lambda k: _Fbold_real(profile, g, k, c0, opts)
    vals = [fun(k) for k in ks]
    while vals[-1] <= 0 and ks[-1] < 1e4 / profile.h:
        ks = np.append(ks, 2.0 * ks[-1])
        vals.append(fun(ks[-1]))
    roots = []
    marginal = False
    F_at0 = eval_F(profile, g, 0.0, 0.0, c0, opts).F.real
    if abs(F_at0) < 1e-12 * max(1.0, g):
        roots.append(0.0)
        marginal = True
    for a, b, fa, fb in zip(ks[:-1], ks[1:], vals[:-1], vals[1:]):
        if fb == 0.0:
            roots.append(float(b))
        elif fa * fb < 0:
            roots.append(brentq(fun, a, b, xtol=1e-14, rtol=1e-15))
    roots = sorted(set(roots))
    if k_C is not None and g >= F0:
        cls = "two_roots" if len(roots) == 2 else "unexpected"
    else:
        cls = "single_root" if len(roots) == 1 else "unexpected"
    k0 = roots[-1] if roots else math.nan
    pos = False
    if roots:
        grid = np.linspace(-profile.h, 0.0, 401)
        y = rayleigh.solve_limit(profile, k0, c0, grid=grid, opts=opts).y.real
        pos = bool(np.all(y[1:] > 0))
    ill = (k_C is not None and len(roots) == 2 and k_C - roots[0] < GAP_TOL)
    return InflectionEntry(inf.c0, inf.x20, inf.sign_U3, k_C, float(F0), tuple(roots),
                           cls, pos, marginal, ill)


# --------------------------------------------------------------- report

@dataclass(frozen=True)
class NeutralModeReport:
    g: float
    sigma: float
    k_minus: float
    entries: tuple[InflectionEntry, ...] = ()
    capillary: CapillaryRoots | None = None

    def lines(self) -> list[str]:
        """key=value text, one fact per line."""
        out = [f"g={self.g!r}", f"sigma={self.sigma!r}", f"k_minus={self.k_minus!r}"]
        if self.capillary is not None:
            out.append(f"g_sharp={self.capillary.g_sharp!r}")
            out.append("k_sharp=" + ",".join(repr(k) for k in self.capillary.roots))
        out.append(f"inflections={len(self.entries)}")
        for i, e in enumerate(self.entries):
            p = f"inflection[{i}]."
            out += [p + f"c0={e.c0!r}", p + f"x20={e.x20!r}", p + f"sign_U3={e.sign_U3}",
                    p + f"k_C={'none' if e.k_C is None else repr(e.k_C)}",
                    p + f"F0={e.F0!r}", p + "S=" + ",".join(repr(k) for k in e.S),
                    p + f"classification={e.classification}",
                    p + f"k0_eigenfunction_positive={str(e.k0_positive).lower()}",
                    p + f"marginal={str(e.marginal).lower()}",
                    p + f"ill_conditioned={str(e.ill_conditioned).lower()}"]
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["c0", "x20", "sign_U3", "k_C", "F0", "S", "classification", "k_minus"])
            for e in self.entries:
                w.writerow([repr(e.c0), repr(e.x20), e.sign_U3,
                            "" if e.k_C is None else repr(e.k_C), repr(e.F0),
                            ";".join(repr(k) for k in e.S), e.classification,
                            repr(self.k_minus)])


def neutral_modes(profile: ShearProfile, g: float, sigma: float = 0.0,
                  opts: SolverOptions = DEFAULT, map_fn=map) -> NeutralModeReport:
    cap = None
    if sigma > 0:
        cap = find_k_minus(profile, g, sigma, opts)
    km = find_k_minus(profile, g, 0.0, opts)
    entries = tuple(map_fn(lambda inf: find_S(profile, g, inf.c0, opts=opts),
                           profile.inflections))
    return NeutralModeReport(float(g), float(sigma), float(km), entries, cap)
