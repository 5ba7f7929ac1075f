"""Loop versions of the hot kernels for numba.

Each function mirrors the ``*_np`` function of the same stem in
``_hot_numpy`` and is checked against it in the test-suite.  The kernel
formulas are inlined through small jitted scalar helpers so that everything
compiles in nopython mode and caches to disk.  The space and field kernels run
their outer loop with ``prange``; ``FBP_THREADS`` caps the thread count.
"""

import math

import numpy as np

from ._accel import njit, prange
from .kernels import UNDERFLOW

SQPI = math.sqrt(math.pi)


@njit
def _g(d, r, D):
    a = 4.0 * D * r
    arg = -d * d / a
    if arg < UNDERFLOW:
        return 0.0
    return math.exp(arg) / math.sqrt(math.pi * a)


@njit
def history_psi_nb(t, m, W, y0n, y1n, y0m, y1m, c1, c2, gw, D, beta):
    N1 = t.shape[0]
    S1 = np.zeros(N1)
    S2 = np.zeros(N1)
    for n in range(1, N1):
        x1 = y1n[n]
        x0 = y0n[n]
        acc1 = 0.0
        acc2 = 0.0
        for j in range(n):
            r = t[n] - m[j]
            a = 4.0 * D * r
            wt = W[n, j] * math.sqrt(r)
            src = beta * (c2[j] - gw[j])
            # eq. 1 at y1(t_n)
            k = _g(x1 - y1m[j], r, D)
            ki = _g(x1 + y1m[j], r, D)
            ny_11 = -(2.0 * (x1 - y1m[j]) / a) * k - (2.0 * (x1 + y1m[j]) / a) * ki
            dm = x1 - y0m[j]
            dp = x1 + y0m[j]
            k = _g(dm, r, D)
            ki = _g(dp, r, D)
            ny_10 = -(2.0 * dm / a) * k - (2.0 * dp / a) * ki
            gxx = (4.0 * dm * dm / (a * a) - 2.0 / a) * k - (4.0 * dp * dp / (a * a) - 2.0 / a) * ki
            acc1 += wt * (D * c1[j] * ny_11 - D * c2[j] * gxx + src * ny_10)
            # eq. 2 at y0(t_n)
            n_01 = _g(x0 - y1m[j], r, D) + _g(x0 + y1m[j], r, D)
            k = _g(x0 - y0m[j], r, D)
            ki = _g(x0 + y0m[j], r, D)
            gy_00 = -(2.0 * (x0 - y0m[j]) / a) * k + (2.0 * (x0 + y0m[j]) / a) * ki
            acc2 += wt * (D * c1[j] * n_01 - D * c2[j] * gy_00 + src * (k + ki))
        S1[n] = acc1
        S2[n] = acc2
    return S1, S2


@njit(parallel=True)
def space_pl_nb(x, t, yk, fk, D, sign):
    P = x.shape[0]
    K = yk.shape[0] - 1
    out = np.zeros(P)
    for p in prange(P):
        s = math.sqrt(4.0 * D * t[p])
        total = 0.0
        for half in range(2):
            xc = x[p] if half == 0 else -x[p]
            sgn = 1.0 if half == 0 else sign
            acc = 0.0
            # erf and exp at the left edge carry over to the next cell
            ea = (yk[0] - xc) / s
            erf_a = math.erf(ea)
            exp_a = math.exp(-ea * ea)
            for c in range(K):
                lo = yk[c]
                hi = yk[c + 1]
                eb = (hi - xc) / s
                if eb < -6.0 or ea > 6.0:
                    # erf saturated on the whole cell: no contribution
                    erf_b = -1.0 if eb < 0.0 else 1.0
                    exp_b = 0.0
                else:
                    erf_b = math.erf(eb)
                    exp_b = math.exp(-eb * eb)
                    slope = (fk[c + 1] - fk[c]) / (hi - lo)
                    i0 = 0.5 * (erf_b - erf_a)
                    i1 = (s / (2.0 * SQPI)) * (exp_a - exp_b)
                    acc += (fk[c] + slope * (xc - lo)) * i0 + slope * i1
                ea, erf_a, exp_a = eb, erf_b, exp_b
            total += sgn * acc
        out[p] = total
    return out


@njit
def _slice_term(y, xi1, xi0, r, D, beta, c1, c2, gw):
    a = 4.0 * D * r
    n1 = _g(y - xi1, r, D) + _g(y + xi1, r, D)
    k = _g(y - xi0, r, D)
    ki = _g(y + xi0, r, D)
    nxi0 = (2.0 * (y - xi0) / a) * k - (2.0 * (y + xi0) / a) * ki
    return D * c1 * n1 + D * c2 * nxi0 + beta * (c2 - gw) * (k + ki)


@njit(parallel=True)
def field_history_nb(ys, r, wq, y0q, y1q, c1q, c2q, gwq, D, beta):
    out = np.zeros(ys.shape[0])
    for i in prange(ys.shape[0]):
        acc = 0.0
        for q in range(r.shape[1]):
            acc += wq[i, q] * _slice_term(ys[i], y1q[i, q], y0q[i, q], r[i, q], D, beta,
                                          c1q[i, q], c2q[i, q], gwq[i, q])
        out[i] = acc
    return out


@njit
def _flux_value(code, params, tt, gg, t):
    if code == 0:
        return params[0]
    if code == 1:
        return params[0] + params[1] * t
    if code == 2:
        return params[0] * math.exp(params[1] * t)
    return np.interp(t, tt, gg)


@njit
def frontfix_nb(U, s, t_out, D, beta, safety, code, params, tt, gg, t0, dt_max):
    U = U.copy()
    Nx = U.shape[0] - 1
    dxi = 1.0 / Nx
    n_out = t_out.shape[0]
    U_out = np.full((n_out, Nx + 1), np.nan)
    s_out = np.full(n_out, np.nan)
    u_min = np.full(n_out, np.nan)
    new = np.empty(Nx)
    t = 0.0
    k = 0
    steps = 0
    running_min = U.min()
    while k < n_out:
        if t >= t_out[k] - 1e-15 * max(1.0, t_out[k]):
            U_out[k] = U
            s_out[k] = s
            u_min[k] = running_min
            k += 1
            continue
        umax = np.max(np.abs(U))
        dt = safety * dxi * dxi * s * s / (D * umax * umax)
        if dt_max > 0 and dt > dt_max:
            dt = dt_max
        if t + dt >= t_out[k]:
            dt = t_out[k] - t
        g = _flux_value(code, params, tt, gg, t + t0)
        sdot = beta - (D / s) * (3.0 * U[Nx] - 4.0 * U[Nx - 1] + U[Nx - 2]) / (2.0 * dxi)
        for i in range(Nx):
            left = U[1] - 2.0 * dxi * s * g / D if i == 0 else U[i - 1]
            right = U[i + 1]
            ui = U[i]
            ux = (right - left) / (2.0 * dxi)
            uxx = (right - 2.0 * ui + left) / (dxi * dxi)
            new[i] = ui + dt * ((i * dxi) * (sdot / s) * ux + ui * ui * (D * uxx / (s * s) - ux / s))
        ok = True
        for i in range(Nx):
            U[i] = new[i]
            if not math.isfinite(new[i]):
                ok = False
            if new[i] < running_min:
                running_min = new[i]
        U[Nx] = beta
        s = s + dt * sdot
        t = t + dt
        steps += 1
        if not (ok and math.isfinite(s) and s > 0):
            return U_out, s_out, -steps, u_min, t
    return U_out, s_out, steps, u_min, t
