# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Rayleigh integrator.

Adaptive DOP853 for y'' = (k^2 + U''/(U - c)) y with the profile evaluated
by a postfix jet program (value, first, second derivative per stack slot).
Mirrors ``_pykernel.integrate``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, log, pow, tanh, exp, sin, cos, fmax, fmin
from libc.stdlib cimport malloc, free

cdef extern from "complex.h" nogil:
    double cabs(double complex)

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_MUL = 4
    OP_DIV = 5
    OP_NEG = 6
    OP_POW = 7
    OP_TANH = 8
    OP_EXP = 9
    OP_SIN = 10
    OP_COS = 11

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double RESCALE = 1e100


cdef inline void run_jet(const int[:] ops, const int[:] iargs, const double[:] fargs,
                         double* st, double x, double* u, double* u2) noexcept nogil:
    cdef Py_ssize_t i, n = ops.shape[0]
    cdef int sp = 0, op, p
    cdef double a0, a1, a2, b0, b1, b2, q0, q1, t, s, c, e, pm1, pm2
    for i in range(n):
        op = ops[i]
        if op == OP_CONST:
            st[3 * sp] = fargs[i]
            st[3 * sp + 1] = 0.0
            st[3 * sp + 2] = 0.0
            sp += 1
        elif op == OP_VAR:
            st[3 * sp] = x
            st[3 * sp + 1] = 1.0
            st[3 * sp + 2] = 0.0
            sp += 1
        elif op <= OP_DIV:
            sp -= 1
            b0 = st[3 * sp]
            b1 = st[3 * sp + 1]
            b2 = st[3 * sp + 2]
            a0 = st[3 * sp - 3]
            a1 = st[3 * sp - 2]
            a2 = st[3 * sp - 1]
            if op == OP_ADD:
                st[3 * sp - 3] = a0 + b0
                st[3 * sp - 2] = a1 + b1
                st[3 * sp - 1] = a2 + b2
            elif op == OP_SUB:
                st[3 * sp - 3] = a0 - b0
                st[3 * sp - 2] = a1 - b1
                st[3 * sp - 1] = a2 - b2
            elif op == OP_MUL:
                st[3 * sp - 3] = a0 * b0
                st[3 * sp - 2] = a1 * b0 + a0 * b1
                st[3 * sp - 1] = a2 * b0 + 2.0 * a1 * b1 + a0 * b2
            else:
                q0 = a0 / b0
                q1 = (a1 - q0 * b1) / b0
                st[3 * sp - 3] = q0
                st[3 * sp - 2] = q1
                st[3 * sp - 1] = (a2 - 2.0 * q1 * b1 - q0 * b2) / b0
        else:
            a0 = st[3 * sp - 3]
            a1 = st[3 * sp - 2]
            a2 = st[3 * sp - 1]
            if op == OP_NEG:
                st[3 * sp - 3] = -a0
                st[3 * sp - 2] = -a1
                st[3 * sp - 1] = -a2
            elif op == OP_POW:
                p = iargs[i]
                if p == 0:
                    st[3 * sp - 3] = 1.0
                    st[3 * sp - 2] = 0.0
                    st[3 * sp - 1] = 0.0
                elif p != 1:
                    if p > 0:
                        pm2 = pow(a0, p - 2)
                        pm1 = pm2 * a0
                    else:
                        pm1 = pow(a0, p - 1)
                        pm2 = pm1 / a0
                    st[3 * sp - 3] = pm1 * a0
                    st[3 * sp - 2] = p * pm1 * a1
                    st[3 * sp - 1] = p * (p - 1) * pm2 * a1 * a1 + p * pm1 * a2
            elif op == OP_TANH:
                t = tanh(a0)
                s = 1.0 - t * t
                st[3 * sp - 3] = t
                st[3 * sp - 2] = s * a1
                st[3 * sp - 1] = s * a2 - 2.0 * t * s * a1 * a1
            elif op == OP_EXP:
                e = exp(a0)
                st[3 * sp - 3] = e
                st[3 * sp - 2] = e * a1
                st[3 * sp - 1] = e * (a2 + a1 * a1)
            elif op == OP_SIN:
                s = sin(a0)
                c = cos(a0)
                st[3 * sp - 3] = s
                st[3 * sp - 2] = c * a1
                st[3 * sp - 1] = c * a2 - s * a1 * a1
            else:
                s = sin(a0)
                c = cos(a0)
                st[3 * sp - 3] = c
                st[3 * sp - 2] = -s * a1
                st[3 * sp - 1] = -s * a2 - c * a1 * a1
    u[0] = st[0]
    u2[0] = st[2]


cdef inline double complex coef(const int[:] ops, const int[:] iargs, const double[:] fargs,
                                double* st, double x, double k2, double complex c) noexcept nogil:
    cdef double u, u2
    run_jet(ops, iargs, fargs, st, x, &u, &u2)
    return k2 + u2 / (u - c)


def integrate(const int[:] ops, const int[:] iargs, const double[:] fargs, int depth,
              double k2, double complex c, double x0, double complex y0, double complex yp0,
              const double[:] xout, double rtol, double atol, double h_init, long max_steps,
              const double[:, :] A, const double[:] B, const double[:] C,
              const double[:] E3, const double[:] E5):
    """See ``_pykernel.integrate``."""
    cdef Py_ssize_t nout = xout.shape[0], ns = B.shape[0]
    cdef cnp.ndarray[cnp.complex128_t] ys_arr = np.zeros(nout, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t] yps_arr = np.zeros(nout, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t] ls_arr = np.zeros(nout, dtype=np.float64)
    cdef double complex[:] ys = ys_arr
    cdef double complex[:] yps = yps_arr
    cdef double[:] lsv = ls_arr
    cdef double* st = <double*> malloc(3 * (depth + 1) * sizeof(double))
    cdef double complex* K1 = <double complex*> malloc((ns + 1) * sizeof(double complex))
    cdef double complex* K2 = <double complex*> malloc((ns + 1) * sizeof(double complex))
    cdef double x = x0, h = h_init, hs, xt, hmin, err, factor, hnew, sc1, sc2, n5, n3, m, ls = 0.0
    cdef double complex y = y0, yp = yp0, yn, ypn, dy, dyp, f0a, f0b, fna, fnb
    cdef double complex e5a, e5b, e3a, e3b, q
    cdef long nsteps = 0
    cdef int status = 0, clipped, rejected = 0
    cdef Py_ssize_t j, s, r
    if st == NULL or K1 == NULL or K2 == NULL:
        free(st)
        free(K1)
        free(K2)
        raise MemoryError()
    with nogil:
        f0a = yp
        f0b = coef(ops, iargs, fargs, st, x, k2, c) * y
        for j in range(nout):
            xt = xout[j]
            while x < xt:
                if nsteps >= max_steps:
                    status = 2
                    break
                hmin = 1e-14 * fmax(1.0, fabs(x))
                clipped = x + h >= xt
                hs = xt - x if clipped else h
                K1[0] = f0a
                K2[0] = f0b
                for s in range(1, ns):
                    dy = 0.0
                    dyp = 0.0
                    for r in range(s):
                        dy = dy + A[s, r] * K1[r]
                        dyp = dyp + A[s, r] * K2[r]
                    K1[s] = yp + hs * dyp
                    K2[s] = coef(ops, iargs, fargs, st, x + C[s] * hs, k2, c) * (y + hs * dy)
                dy = 0.0
                dyp = 0.0
                for r in range(ns):
                    dy = dy + B[r] * K1[r]
                    dyp = dyp + B[r] * K2[r]
                yn = y + hs * dy
                ypn = yp + hs * dyp
                fna = ypn
                fnb = coef(ops, iargs, fargs, st, x + hs, k2, c) * yn
                K1[ns] = fna
                K2[ns] = fnb
                e5a = 0.0
                e5b = 0.0
                e3a = 0.0
                e3b = 0.0
                for r in range(ns + 1):
                    e5a = e5a + E5[r] * K1[r]
                    e5b = e5b + E5[r] * K2[r]
                    e3a = e3a + E3[r] * K1[r]
                    e3b = e3b + E3[r] * K2[r]
                sc1 = atol + rtol * fmax(cabs(y), cabs(yn))
                sc2 = atol + rtol * fmax(cabs(yp), cabs(ypn))
                n5 = (cabs(e5a) / sc1) ** 2 + (cabs(e5b) / sc2) ** 2
                n3 = (cabs(e3a) / sc1) ** 2 + (cabs(e3b) / sc2) ** 2
                if n5 == 0.0 and n3 == 0.0:
                    err = 0.0
                else:
                    err = hs * n5 / sqrt((n5 + 0.01 * n3) * 2.0)
                nsteps += 1
                if err != err:
                    err = 1e10
                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = fmin(MAX_FACTOR, SAFETY * pow(err, -0.125))
                    if rejected:
                        factor = fmin(1.0, factor)
                    rejected = 0
                    if clipped:
                        x = xt
                    else:
                        x = x + hs
                    y = yn
                    yp = ypn
                    f0a = fna
                    f0b = fnb
                    hnew = hs * factor
                    if clipped:
                        h = fmax(h, hnew)
                    else:
                        h = hnew
                    m = fmax(cabs(y), cabs(yp))
                    if m > RESCALE:
                        y = y / m
                        yp = yp / m
                        f0a = f0a / m
                        f0b = f0b / m
                        ls = ls + log(m)
                else:
                    h = hs * fmax(MIN_FACTOR, SAFETY * pow(err, -0.125))
                    rejected = 1
                    if h < hmin:
                        status = 1
                        break
            if status:
                break
            ys[j] = y
            yps[j] = yp
            lsv[j] = ls
    free(st)
    free(K1)
    free(K2)
    return ys_arr, yps_arr, ls_arr, nsteps, status
