"""Pure-Python Rayleigh integrator (fallback for the compiled ``_core``).

Same algorithm, same tableau, same step control as ``_core.pyx``; results
agree to rounding.
"""

from __future__ import annotations

import math

from .expr import run_program

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
RESCALE = 1e100


def integrate(ops, iargs, fargs, depth, k2, c, x0, y0, yp0, xout,
              rtol, atol, h_init, max_steps, A, B, C, E3, E5):
    """Integrate y'' = (k2 + U''/(U - c)) y from x0 through the points xout.

    Returns ``(ys, yps, logscale, nsteps, status)``; true values are
    ``ys[j] * exp(logscale[j])``.  status: 0 ok, 1 step underflow,
    2 step budget exhausted.
    """
    ops = [int(o) for o in ops]
    iargs = [int(i) for i in iargs]
    fargs = [float(f) for f in fargs]
    A = [[float(v) for v in row] for row in A]
    B = [float(v) for v in B]
    C = [float(v) for v in C]
    E3 = [float(v) for v in E3]
    E5 = [float(v) for v in E5]
    k2 = float(k2)
    c = complex(c)
    ns = len(B)

    def rhs(x, y, yp):
        u, u2 = run_program(ops, iargs, fargs, x)
        return yp, (k2 + u2 / (u - c)) * y

    nout = len(xout)
    ys = [0j] * nout
    yps = [0j] * nout
    ls_out = [0.0] * nout
    x = float(x0)
    y = complex(y0)
    yp = complex(yp0)
    ls = 0.0
    h = float(h_init)
    f0 = rhs(x, y, yp)
    nsteps = 0
    status = 0
    K1 = [0j] * (ns + 1)
    K2 = [0j] * (ns + 1)
    rejected = False
    for j in range(nout):
        xt = float(xout[j])
        while x < xt:
            if nsteps >= max_steps:
                status = 2
                break
            hmin = 1e-14 * max(1.0, abs(x))
            clipped = x + h >= xt
            hs = xt - x if clipped else h
            K1[0], K2[0] = f0
            for s in range(1, ns):
                row = A[s]
                dy = 0j
                dyp = 0j
                for r in range(s):
                    dy += row[r] * K1[r]
                    dyp += row[r] * K2[r]
                K1[s], K2[s] = rhs(x + C[s] * hs, y + hs * dy, yp + hs * dyp)
            dy = 0j
            dyp = 0j
            for r in range(ns):
                dy += B[r] * K1[r]
                dyp += B[r] * K2[r]
            yn = y + hs * dy
            ypn = yp + hs * dyp
            fn = rhs(x + hs, yn, ypn)
            K1[ns], K2[ns] = fn
            e5a = e5b = e3a = e3b = 0j
            for r in range(ns + 1):
                e5a += E5[r] * K1[r]
                e5b += E5[r] * K2[r]
                e3a += E3[r] * K1[r]
                e3b += E3[r] * K2[r]
            sc1 = atol + rtol * max(abs(y), abs(yn))
            sc2 = atol + rtol * max(abs(yp), abs(ypn))
            n5 = abs(e5a / sc1) ** 2 + abs(e5b / sc2) ** 2
            n3 = abs(e3a / sc1) ** 2 + abs(e3b / sc2) ** 2
            if n5 == 0.0 and n3 == 0.0:
                err = 0.0
            else:
                err = hs * n5 / math.sqrt((n5 + 0.01 * n3) * 2.0)
            nsteps += 1
            if err != err:
                err = 1e10
            if err < 1.0:
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** (-0.125))
                if rejected:
                    factor = min(1.0, factor)
                rejected = False
                x = xt if clipped else x + hs
                y, yp, f0 = yn, ypn, fn
                hnew = hs * factor
                h = max(h, hnew) if clipped else hnew
                m = max(abs(y), abs(yp))
                if m > RESCALE:
                    y /= m
                    yp /= m
                    f0 = (f0[0] / m, f0[1] / m)
                    ls += math.log(m)
            else:
                h = hs * max(MIN_FACTOR, SAFETY * err ** (-0.125))
                rejected = True
                if h < hmin:
                    status = 1
                    break
        if status:
            break
        ys[j] = y
        yps[j] = yp
        ls_out[j] = ls
    return ys, yps, ls_out, nsteps, status
