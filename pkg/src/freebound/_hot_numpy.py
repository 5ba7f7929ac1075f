"""Vectorised numpy versions of the hot loops.

Conventions shared with ``_hot_numba``: ``t`` are the N+1 time nodes,
``m`` the N midpoints, ``W`` the (N+1, N) product-integration weights for the
``(t - tau)^{-1/2}`` factor.  Kernel values are multiplied by ``sqrt(t - tau)``
before weighting, so every history sum reads ``sum_j W[n, j] * sqrt(r) * k``.
"""

import numpy as np
from scipy.special import erf

from .kernels import UNDERFLOW

SQPI = np.sqrt(np.pi)


def _g(d, r, D):
    a = 4.0 * D * r
    arg = -d * d / a
    return np.where(arg >= UNDERFLOW, np.exp(np.maximum(arg, UNDERFLOW)), 0.0) / np.sqrt(np.pi * a)


def _pair(x, xi, r, D):
    return _g(x - xi, r, D), _g(x + xi, r, D)


def history_psi_np(t, m, W, y0n, y1n, y0m, y1m, c1, c2, gw, D, beta):
    """History parts of both density equations at every node.

    Returns ``(S1, S2)`` of length N+1 with ``S[0] = 0``.
    """
    r = t[:, None] - m[None, :]
    live = r > 0
    r = np.where(live, r, 1.0)
    a = 4.0 * D * r
    wt = np.where(live, W * np.sqrt(r), 0.0)
    src = beta * (c2 - gw)

    # eq. 1, evaluated at y1(t_n)
    x = y1n[:, None]
    k, ki = _pair(x, y1m[None, :], r, D)
    ny_11 = -(2.0 * (x - y1m) / a) * k - (2.0 * (x + y1m) / a) * ki
    k, ki = _pair(x, y0m[None, :], r, D)
    dm, dp = x - y0m, x + y0m
    ny_10 = -(2.0 * dm / a) * k - (2.0 * dp / a) * ki
    gxx = (4.0 * dm * dm / (a * a) - 2.0 / a) * k - (4.0 * dp * dp / (a * a) - 2.0 / a) * ki
    gtau_10 = -D * gxx
    S1 = (wt * (D * c1 * ny_11 + c2 * gtau_10 + src * ny_10)).sum(axis=1)

    # eq. 2, evaluated at y0(t_n)
    x = y0n[:, None]
    k, ki = _pair(x, y1m[None, :], r, D)
    n_01 = k + ki
    k, ki = _pair(x, y0m[None, :], r, D)
    n_00 = k + ki
    gy_00 = -(2.0 * (x - y0m) / a) * k + (2.0 * (x + y0m) / a) * ki
    S2 = (wt * (D * c1 * n_01 - D * c2 * gy_00 + src * n_00)).sum(axis=1)
    return S1, S2


def space_pl_np(x, t, yk, fk, D, sign):
    """``int (K(x,t;xi,0) + sign*K(-x,t;xi,0)) f(xi) dxi`` for piecewise-linear ``f``.

    ``f`` takes the values ``fk`` at ``yk``; each cell is integrated exactly.
    ``x`` and ``t`` are 1-D arrays of equal length with ``t > 0``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.sqrt(4.0 * D * t)[:, None]
    lo, hi = yk[:-1][None, :], yk[1:][None, :]
    slope = np.diff(fk) / np.diff(yk)
    out = np.zeros(x.shape)
    for sgn, xx in ((1.0, x), (sign, -x)):
        xc = xx[:, None]
        ea = (lo - xc) / s
        eb = (hi - xc) / s
        i0 = 0.5 * (erf(eb) - erf(ea))
        i1 = (s / (2.0 * SQPI)) * (np.exp(-ea * ea) - np.exp(-eb * eb))
        val = (fk[:-1] + slope * (xc - lo)) * i0 + slope * i1
        out += sgn * val.sum(axis=1)
    return out


def _slice_terms(y, xi1, xi0, r, D, beta, c1, c2, gw):
    a = 4.0 * D * r
    k, ki = _pair(y, xi1, r, D)
    n1 = k + ki
    k, ki = _pair(y, xi0, r, D)
    n0 = k + ki
    nxi0 = (2.0 * (y - xi0) / a) * k - (2.0 * (y + xi0) / a) * ki
    return D * c1 * n1 + D * c2 * nxi0 + beta * (c2 - gw) * n0


def field_history_np(ys, r, wq, y0q, y1q, c1q, c2q, gwq, D, beta):
    """History part of the field representation at the points ``ys``.

    Row ``i`` of the 2-D arrays is the quadrature rule for ``ys[i]``.

    ``r`` are lags ``t - tau`` and ``wq`` weights including the Jacobian.
    """
    if r.shape[1] == 0:
        return np.zeros(len(ys))
    terms = _slice_terms(ys[:, None], y1q, y0q, r, D, beta, c1q, c2q, gwq)
    return (terms * wq).sum(axis=1)


def flux_value(code, params, tt, gg, t):
    """Scalar flux for the encoded forms used by the front-fixing loop."""
    if code == 0:
        return params[0]
    if code == 1:
        return params[0] + params[1] * t
    if code == 2:
        return params[0] * np.exp(params[1] * t)
    return float(np.interp(t, tt, gg))


def frontfix_np(U, s, t_out, D, beta, safety, code, params, tt, gg, t0, dt_max):
    """Explicit front-fixing march; returns ``(U_out, s_out, steps, u_min)``.

    ``U`` holds the initial profile on ``xi = i / Nx``; output times must be
    increasing and ``t_out[0] >= 0``.  ``u_min`` is the running minimum of
    ``U`` recorded at each output time.  A non-finite state or ``s <= 0``
    stops the march and is signalled by ``steps < 0``; the returned arrays
    are then filled up to the last output reached.
    """
    U = U.copy()
    Nx = U.shape[0] - 1
    dxi = 1.0 / Nx
    xi = np.arange(Nx + 1) * dxi
    n_out = t_out.shape[0]
    U_out = np.full((n_out, Nx + 1), np.nan)
    s_out = np.full(n_out, np.nan)
    u_min = np.full(n_out, np.nan)
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
        g = flux_value(code, params, tt, gg, t + t0)
        sdot = beta - (D / s) * (3.0 * U[Nx] - 4.0 * U[Nx - 1] + U[Nx - 2]) / (2.0 * dxi)
        left = np.empty(Nx)
        left[0] = U[1] - 2.0 * dxi * s * g / D
        left[1:] = U[: Nx - 1]
        right = U[1 : Nx + 1]
        Ui = U[:Nx]
        ux = (right - left) / (2.0 * dxi)
        uxx = (right - 2.0 * Ui + left) / (dxi * dxi)
        U[:Nx] = Ui + dt * (xi[:Nx] * (sdot / s) * ux + Ui * Ui * (D * uxx / (s * s) - ux / s))
        U[Nx] = beta
        s = s + dt * sdot
        t = t + dt
        steps += 1
        running_min = min(running_min, U.min())
        if not (np.isfinite(s) and s > 0 and np.all(np.isfinite(U))):
            return U_out, s_out, -steps, u_min, t
    return U_out, s_out, steps, u_min, t
