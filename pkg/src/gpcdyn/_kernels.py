"""Compiled kernels over flattened polynomial term tables.

A term table is six arrays describing sum-of-monomials right-hand sides::

    target[m]  row fed by term m
    coeff[m]   real coefficient
    fkind[m]   0 = none, 1 = cos(omega t), 2 = sin(omega t)
    omega[m]   forcing frequency
    fptr[m]    start of term m's factor list in fidx (fptr has m + 1 entries)
    fidx[j]    variable index of each factor (repeats encode powers)

All kernels take the table unpacked so numba compiles a single
specialisation shared by every system.
"""
import numpy as np
from numba import njit

OK = 0
STEP_UNDERFLOW = 1
NON_FINITE = 2
MAX_STEPS = 3

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@njit(cache=True)
def _forcing(kind, omega, t):
    if kind == 1:
        return np.cos(omega * t)
    if kind == 2:
        return np.sin(omega * t)
    return 1.0


@njit(cache=True)
def eval_terms(t, x, target, coeff, fkind, omega, fptr, fidx, out):
    out[:] = 0.0
    for m in range(target.size):
        v = coeff[m]
        if fkind[m] != 0:
            v *= _forcing(fkind[m], omega[m], t)
        for j in range(fptr[m], fptr[m + 1]):
            v *= x[fidx[j]]
        out[target[m]] += v


@njit(cache=True)
def jac_terms(t, x, target, coeff, fkind, omega, fptr, fidx, jac):
    jac[:, :] = 0.0
    for m in range(target.size):
        base = coeff[m]
        if fkind[m] != 0:
            base *= _forcing(fkind[m], omega[m], t)
        p0 = fptr[m]
        p1 = fptr[m + 1]
        for a in range(p0, p1):
            v = base
            for b in range(p0, p1):
                if b != a:
                    v *= x[fidx[b]]
            jac[target[m], fidx[a]] += v


@njit(cache=True)
def _aug_rhs(t, y, d, ncol, target, coeff, fkind, omega, fptr, fidx, out, fx, jac):
    x = y[:d]
    eval_terms(t, x, target, coeff, fkind, omega, fptr, fidx, fx)
    out[:d] = fx
    if ncol > 0:
        jac_terms(t, x, target, coeff, fkind, omega, fptr, fidx, jac)
        phi = y[d:].reshape((d, ncol))
        out[d:] = (jac @ phi).ravel()


@njit(cache=True)
def _rms(err, y, ynew, rtol, atol):
    s = 0.0
    for i in range(err.size):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        r = err[i] / sc
        s += r * r
    return np.sqrt(s / err.size)


@njit(cache=True)
def dopri5(target, coeff, fkind, omega, fptr, fidx, d, ncol, y0, t0, t_out, t_end,
           rtol, atol, h0, hmax, max_steps):
    """Adaptive Dormand-Prince 5(4) with FSAL, stepping exactly onto ``t_out``.

    Returns (states at t_out, t reached, last step proposal, n_fev, n_accepted,
    n_rejected, status).
    """
    n = y0.size
    nout = t_out.size
    Y = np.full((nout, n), np.nan)
    y = y0.copy()
    t = t0
    fx = np.empty(d)
    jac = np.empty((d, d))
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    ys = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)
    nfev = 0
    nacc = 0
    nrej = 0
    status = OK

    io = 0
    while io < nout and t_out[io] <= t:
        Y[io] = y
        io += 1

    _aug_rhs(t, y, d, ncol, target, coeff, fkind, omega, fptr, fidx, k1, fx, jac)
    nfev += 1

    h = h0
    if h <= 0.0:
        # Hairer-Norsett-Wanner starting step
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
        d0 = np.sqrt(d0 / n)
        d1 = np.sqrt(d1 / n)
        if d0 < 1e-5 or d1 < 1e-5:
            hh = 1e-6
        else:
            hh = 0.01 * d0 / d1
        hh = min(hh, max(t_end - t, 1e-12))
        for i in range(n):
            ys[i] = y[i] + hh * k1[i]
        _aug_rhs(t + hh, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k2, fx, jac)
        nfev += 1
        d2 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d2 += ((k2[i] - k1[i]) / sc) ** 2
        d2 = np.sqrt(d2 / n) / hh
        dm = max(d1, d2)
        if dm <= 1e-15:
            h1 = max(1e-6, hh * 1e-3)
        else:
            h1 = (0.01 / dm) ** 0.2
        h = min(100.0 * hh, h1)
    h = min(h, hmax)

    last_rejected = False
    last_nonfinite = False
    while t < t_end:
        if nacc + nrej >= max_steps:
            status = MAX_STEPS
            break
        tgt = t_out[io] if io < nout else t_end
        if tgt > t_end:
            tgt = t_end
        clipped = False
        hs = h
        if t + hs >= tgt:
            hs = tgt - t
            clipped = True

        for i in range(n):
            ys[i] = y[i] + hs * A21 * k1[i]
        _aug_rhs(t + C2 * hs, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k2, fx, jac)
        for i in range(n):
            ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
        _aug_rhs(t + C3 * hs, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k3, fx, jac)
        for i in range(n):
            ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _aug_rhs(t + C4 * hs, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k4, fx, jac)
        for i in range(n):
            ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _aug_rhs(t + C5 * hs, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k5, fx, jac)
        for i in range(n):
            ys[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                 + A65 * k5[i])
        _aug_rhs(t + hs, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx, k6, fx, jac)
        for i in range(n):
            ynew[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                                   + A76 * k6[i])
        _aug_rhs(t + hs, ynew, d, ncol, target, coeff, fkind, omega, fptr, fidx, k7, fx, jac)
        nfev += 6
        for i in range(n):
            err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                           + E7 * k7[i])
        en = _rms(err, y, ynew, rtol, atol)

        if en <= 1.0:
            if en == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * en ** -0.2))
            if last_rejected:
                fac = min(fac, 1.0)
            t = tgt if clipped else t + hs
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            nacc += 1
            last_rejected = False
            last_nonfinite = False
            while io < nout and t_out[io] <= t:
                Y[io] = y
                io += 1
            hn = hs * fac
            if clipped:
                hn = max(hn, h)
            h = min(hn, hmax)
        else:
            nrej += 1
            last_rejected = True
            if en == en and en < np.inf:
                fac = max(0.2, 0.9 * en ** -0.2)
                last_nonfinite = False
            else:
                fac = 0.2
                last_nonfinite = True
            h = hs * fac
            if h < 1e-14 * max(1.0, abs(t)):
                status = NON_FINITE if last_nonfinite else STEP_UNDERFLOW
                break
    return Y, t, h, nfev, nacc, nrej, status


@njit(cache=True)
def rk4_fixed(target, coeff, fkind, omega, fptr, fidx, d, ncol, y0, t0, t_out, h):
    """Classical RK4; each output interval is split into equal steps of size <= h."""
    n = y0.size
    Y = np.full((t_out.size, n), np.nan)
    y = y0.copy()
    t = t0
    fx = np.empty(d)
    jac = np.empty((d, d))
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    ys = np.empty(n)
    nfev = 0
    nsteps = 0
    for io in range(t_out.size):
        span = t_out[io] - t
        if span > 0.0:
            m = int(np.ceil(span / h - 1e-9))
            hh = span / m
            for s in range(m):
                ts = t + s * hh
                _aug_rhs(ts, y, d, ncol, target, coeff, fkind, omega, fptr, fidx, k1, fx, jac)
                for i in range(n):
                    ys[i] = y[i] + 0.5 * hh * k1[i]
                _aug_rhs(ts + 0.5 * hh, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx,
                         k2, fx, jac)
                for i in range(n):
                    ys[i] = y[i] + 0.5 * hh * k2[i]
                _aug_rhs(ts + 0.5 * hh, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx,
                         k3, fx, jac)
                for i in range(n):
                    ys[i] = y[i] + hh * k3[i]
                _aug_rhs(ts + hh, ys, d, ncol, target, coeff, fkind, omega, fptr, fidx,
                         k4, fx, jac)
                for i in range(n):
                    y[i] += hh * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
                nfev += 4
                nsteps += 1
            t = t_out[io]
        Y[io] = y
    return Y, nfev, nsteps


@njit(cache=True)
def leapfrog(qt, qc, qk, qw, qp, qi, pt, pc, pk, pw, pp, pi_, x0, t0, h, nsteps, stride):
    """Kick-drift-kick Stormer-Verlet.

    The q table holds rows driven by momenta only, the p table rows driven
    by coordinates only; each evaluation therefore touches disjoint rows.
    """
    d = x0.size
    nrec = nsteps // stride + 1
    X = np.empty((nrec, d))
    T = np.empty(nrec)
    x = x0.copy()
    a = np.empty(d)
    v = np.empty(d)
    X[0] = x
    T[0] = t0
    eval_terms(t0, x, pt, pc, pk, pw, pp, pi_, a)
    nfev = 1
    rec = 1
    for s in range(nsteps):
        t = t0 + s * h
        for i in range(d):
            x[i] += 0.5 * h * a[i]
        eval_terms(t + 0.5 * h, x, qt, qc, qk, qw, qp, qi, v)
        for i in range(d):
            x[i] += h * v[i]
        eval_terms(t + h, x, pt, pc, pk, pw, pp, pi_, a)
        for i in range(d):
            x[i] += 0.5 * h * a[i]
        nfev += 2
        if (s + 1) % stride == 0:
            X[rec] = x
            T[rec] = t0 + (s + 1) * h
            rec += 1
    return T, X, nfev
