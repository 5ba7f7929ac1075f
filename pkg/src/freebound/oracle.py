"""Independent front-fixing finite differences, and solution comparison.

With ``xi = x / s(t)`` the moving interval becomes ``[0, 1]`` and

    u_t = u^2 (D u_xixi / s^2 - u_xi / s) + xi (s'/s) u_xi,
    (D/s) u_xi(0, t) = g(t),  u(1, t) = beta,  s' = beta - (D/s) u_xi(1, t).

The march is explicit Euler with a ghost node at ``xi = 0`` and a
one-sided second-order front derivative; the step obeys
``dt <= safety * dxi^2 s^2 / (D max u^2)`` and lands exactly on every
requested output time.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import _hot
from .errors import BlowUpError, InvalidInputError


@dataclass(frozen=True)
class FrontFixGrid:
    Nx: int = 200
    T: float = 0.1
    safety: float = 0.4
    dt_max: float = 0.0  # 0 means CFL only

    def __post_init__(self):
        if int(self.Nx) != self.Nx or self.Nx < 16:
            raise InvalidInputError(f"Nx must be an integer >= 16, got {self.Nx}")
        if not (self.T > 0 and np.isfinite(self.T)):
            raise InvalidInputError(f"T must be positive, got {self.T}")
        if not 0 < self.safety <= 1:
            raise InvalidInputError(f"safety must lie in (0, 1], got {self.safety}")


@dataclass
class FrontFixResult:
    times: np.ndarray
    s: np.ndarray
    xi: np.ndarray
    U: np.ndarray
    steps: int
    u_min: np.ndarray = field(default=None)

    def profile(self, k):
        return self.xi * self.s[k], self.U[k]

    def front_slope(self, k):
        """``u_x(s, t_k)`` by the same one-sided formula the march uses."""
        dxi = self.xi[1] - self.xi[0]
        U = self.U[k]
        return (3 * U[-1] - 4 * U[-2] + U[-3]) / (2 * dxi) / self.s[k]


def _encode_flux(g):
    empty = np.zeros(1)
    if g.form == "constant":
        return 0, np.array([g.params[0], 0.0]), empty, empty
    if g.form == "linear":
        return 1, np.array(g.params, dtype=float), empty, empty
    if g.form == "exponential":
        return 2, np.array(g.params, dtype=float), empty, empty
    tt, gg = g.table
    return 3, np.zeros(2), np.asarray(tt, float), np.asarray(gg, float)


def solve_frontfix(p, grid: FrontFixGrid, times=None) -> FrontFixResult:
    """March the original problem to ``grid.T``.

    ``times`` are the output times (default: 101 uniform points on
    ``[0, T]``); they must lie in ``[0, T]``.
    """
    if times is None:
        times = np.linspace(0.0, grid.T, 101)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0):
        raise InvalidInputError("output times must be a non-empty increasing array")
    if times[0] < 0 or times[-1] > grid.T * (1 + 1e-12):
        raise InvalidInputError("output times must lie in [0, T]")
    xi = np.linspace(0.0, 1.0, grid.Nx + 1)
    U0 = np.asarray(p.u0(xi * p.b), dtype=float)
    U0[-1] = p.beta
    code, params, tt, gg = _encode_flux(p.g)
    U, s, steps, umin, t_last = _hot.frontfix(
        U0, float(p.b), times, float(p.D), float(p.beta), float(grid.safety),
        code, params, tt, gg, float(p.g.t0), float(grid.dt_max),
    )
    if steps < 0:
        raise BlowUpError(f"front-fixing march failed after {-steps} steps", float(t_last))
    return FrontFixResult(times, s, xi, U, int(steps), umin)


@dataclass
class ComparisonReport:
    times: np.ndarray
    s_err: np.ndarray
    s_sup: float
    s_l2: float
    s_rel_sup: float
    u_sup: float
    u_err: np.ndarray

    def as_dict(self):
        return {"s_sup": self.s_sup, "s_l2": self.s_l2, "s_rel_sup": self.s_rel_sup, "u_sup": self.u_sup}


def _profile(sol, k):
    if hasattr(sol, "profile"):
        return sol.profile(k)
    return sol.x[k], sol.u[k]


def _match(ta, tq, tol):
    ia = np.searchsorted(ta, tq)
    out = []
    for q, i in zip(tq, ia):
        for cand in (i - 1, i):
            if 0 <= cand < len(ta) and abs(ta[cand] - q) <= tol:
                out.append(cand)
                break
        else:
            out.append(-1)
    return np.array(out)


def compare(solA, solB, times=None, n_points=101) -> ComparisonReport:
    """Front and profile differences between two solutions.

    Fronts are compared at ``times`` (default: times common to both, else
    ``solA``'s times inside the overlap) by linear interpolation in time.
    Profiles are compared on ``n_points`` common ``x`` points at times present
    in both solutions.  ``s_l2`` is the root-mean-square over the compared
    time window.
    """
    ta, tb = np.asarray(solA.times, float), np.asarray(solB.times, float)
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    scale = max(abs(hi), 1.0)
    if hi < lo - 1e-12 * scale:
        raise InvalidInputError(f"time ranges [{ta[0]}, {ta[-1]}] and [{tb[0]}, {tb[-1]}] are disjoint")
    if times is None:
        times = ta[(ta >= lo - 1e-12 * scale) & (ta <= hi + 1e-12 * scale)]
    times = np.clip(np.asarray(times, dtype=float), lo, hi)
    sa = np.interp(times, ta, solA.s)
    sb = np.interp(times, tb, solB.s)
    err = np.abs(sa - sb)
    span = times[-1] - times[0]
    l2 = float(np.sqrt(trapezoid(err**2, times) / span)) if span > 0 else float(err[0])
    tol = 1e-9 * max(span, 1e-300) + 1e-15 * scale
    ka, kb = _match(ta, times, tol), _match(tb, times, tol)
    uerr = np.full(len(times), np.nan)
    for q, (i, j) in enumerate(zip(ka, kb)):
        if i < 0 or j < 0:
            continue
        xa, ua = _profile(solA, i)
        xb, ub = _profile(solB, j)
        xs = np.linspace(0.0, min(xa[-1], xb[-1]), n_points)
        uerr[q] = np.max(np.abs(np.interp(xs, xa, ua) - np.interp(xs, xb, ub)))
    return ComparisonReport(
        times=times,
        s_err=err,
        s_sup=float(err.max()),
        s_l2=l2,
        s_rel_sup=float(np.max(err / np.abs(sb))),
        u_sup=float(np.nanmax(uerr)) if np.any(np.isfinite(uerr)) else float("nan"),
        u_err=uerr,
    )
