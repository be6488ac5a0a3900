"""One-shot verification harness behind ``shearspec verify``.

A reduced version of the acceptance suite that runs with the solver
options of a run config, followed by a census/branch cross-check for the
configured profile at every k of ``census.k_list``.  Loosening the solver
tolerances makes the finite-difference checks fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import dispersion, modes, rayleigh, tracer
from .errors import NumericalError
from .profile import parse_profile
from .rayleigh import SolverOptions

COUETTE = ("x2", 1.0)
TANH2 = ("tanh(2*(x2+1))", 2.0)
TANH_HALF = ("tanh(0.5*(x2+1))", 2.0)
CONCAVE = ("x2 - 0.3*x2^2", 1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _run(name, fn):
    try:
        ok, detail = fn()
    except (NumericalError, ValueError, ArithmeticError) as exc:
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail)


def couette_oracle(opts):
    p = parse_profile(*COUETTE)
    worst = 0.0
    for k in np.linspace(0.3, 6.0, 6):
        for c in np.linspace(-3.0, 2.0, 6):
            if -1.0 <= c <= 0.0:
                continue
            exact = k / math.tanh(k) * c * c + c - 1.0
            got = dispersion.eval_F(p, 1.0, 0.0, k, c, opts).F.real
            worst = max(worst, abs(got - exact) / max(abs(exact), 1.0))
    km = modes.find_k_minus(p, 1.0, opts=opts)
    ref = brentq(lambda k: k / math.tanh(k) - 2.0, 1.0, 3.0, xtol=1e-15)
    return worst < 1e-9 and abs(km - ref) < 1e-8, f"max rel err {worst:.2e}, |k_- - ref| {abs(km - ref):.2e}"


def k0_identity(opts):
    worst = 0.0
    for case in (TANH2, TANH_HALF, COUETTE):
        p = parse_profile(*case)
        for c in (p.Umin - 1.0, p.Umin - 0.1, p.Umax + 0.1, p.Umax + 1.0):
            got = dispersion.eval_F(p, 1.0, 0.0, 0.0, c, opts).F.real
            worst = max(worst, abs(got - dispersion.F_at_zero_k(p, 1.0, c)))
    return worst < 1e-8, f"max abs err {worst:.2e}"


def boundary_identity(opts):
    p = parse_profile(*TANH2)
    U0, U1 = float(p.U(0.0)), float(p.U1(0.0))
    err = max(abs(dispersion.eval_F(p, 1.0, 0.0, k, U0, opts).F + 1.0) for k in (0, 1, 5, 20))
    eta = 1e-6
    fd = (dispersion.eval_F(p, 1.0, 0.0, 1.0, U0 + eta, opts).F.real + 1.0) / eta
    return err < 1e-8 and abs(fd - U1) < 1e-4, f"|F+g| {err:.1e}, FD dF/dc {fd:.8f} vs U'(0) {U1:.8f}"


def eps_limit(opts):
    p = parse_profile(*TANH2)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        k = rng.uniform(0.0, 5.0)
        c = float(p.U(rng.uniform(-1.9, -0.1)))
        ym, _, ls = rayleigh.solve_limit(p, k, c, opts=opts).end
        y = [rayleigh.solve_regular(p, k, c + 1j * e, opts=opts).end for e in (1e-5, 5e-6)]
        y = [m * math.exp(s) for m, _, s in y]
        ref = 2.0 * y[1] - y[0]
        worst = max(worst, abs(ym * math.exp(ls) - ref) / abs(ref))
    return worst < 1e-6, f"max rel diff {worst:.2e}"


def fd_monotone_in_K(opts):
    p = parse_profile(*TANH_HALF)
    ok = True
    for c in (p.Umin - 0.5, p.Umax + 0.5):
        for k in (0.5, 2.0):
            K, dK = k * k, 1e-3
            f = [dispersion.eval_F(p, 1.0, 0.0, math.sqrt(K + j * dK), c, opts).F.real
                 for j in (-1, 0, 1)]
            ok &= (f[2] - f[0]) > 0 and (f[2] - 2 * f[1] + f[0]) < 0
    return ok, "dF/dK > 0 and d2F/dK2 < 0 at 4 points"


def concave_stable(opts):
    p = parse_profile(*CONCAVE)
    idx = [tracer.index_count(p, 1.0, 0.0, k, opts=opts) for k in (0.5, 2.0, 8.0)]
    return all(i == 0 for i in idx), f"indices {idx}"


def sl_duality(opts):
    p = parse_profile(*TANH2)
    g = 1.3 * modes.eval_F0(p, 0.0, opts)
    eig = modes.sl_negative_eigenvalues(p, g, 0.0, opts=opts)
    entry = modes.find_S(p, g, 0.0, opts=opts)
    ks = sorted(e.k for e in eig)
    pair = len(ks) == len(entry.S) and all(
        abs(a * a - b * b) < 1e-5 * max(1.0, b * b) for a, b in zip(ks, entry.S))
    raw = all(abs(-e.lam - e.k ** 2) < 1e-5 * max(1.0, e.k ** 2) for e in eig)
    return pair and raw, f"|S| = {len(entry.S)}, eigenvalues {len(eig)}"


def f0_classifier(opts):
    out = []
    for case in (TANH2, TANH_HALF):
        p = parse_profile(*case)
        F0 = modes.eval_F0(p, 0.0, opts)
        kc = modes.find_k_C(p, 0.0, opts)
        out.append((F0 > 0) == (kc is not None))
    return all(out), f"agreement {out}"


CHECKS = [
    ("couette_closed_form", couette_oracle),
    ("k0_identity", k0_identity),
    ("boundary_identity_fd", boundary_identity),
    ("eps_limit_vs_frobenius", eps_limit),
    ("monotone_concave_in_K_fd", fd_monotone_in_K),
    ("concave_flow_stable", concave_stable),
    ("sturm_liouville_duality", sl_duality),
    ("F0_classifier", f0_classifier),
]


def census_branch_lines(profile, g, sigma, k_list, branches, opts, map_fn=map):
    """For every k: the traced branches with c_I > 0 at k must appear in the census."""
    censuses = list(map_fn(lambda k: tracer.mode_census(profile, g, sigma, k, opts=opts),
                           k_list))
    out = []
    for k, cz in zip(k_list, censuses):
        expected = []
        for b in branches:
            pts = b.points
            for p0, p1 in zip(pts[:-1], pts[1:]):
                if min(p0.k, p1.k) <= k <= max(p0.k, p1.k) and p0.k != p1.k:
                    t = (k - p0.k) / (p1.k - p0.k)
                    guess = p0.c + t * (p1.c - p0.c)
                    if guess.imag > 1e-3 * profile.spread:
                        try:
                            expected.append(tracer.newton(profile, g, sigma, k, guess,
                                                          maxit=20, opts=opts).c)
                        except NumericalError:
                            expected.append(guess)
                    break
        matched = sum(any(abs(e - u) < 1e-7 for u in cz.unstable) for e in expected)
        ok = matched == len(expected) and cz.index_upper == len(cz.unstable)
        out.append(CheckResult(f"census_branch k={k!r}", ok,
                               f"index {cz.index_upper}, unstable {len(cz.unstable)}, "
                               f"branch points matched {matched}/{len(expected)}"))
    return out


def run_checks(opts: SolverOptions) -> list[CheckResult]:
    return [_run(name, lambda fn=fn: fn(opts)) for name, fn in CHECKS]
