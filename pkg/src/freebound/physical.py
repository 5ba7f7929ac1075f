"""Back to physical variables, and residual diagnostics.

On a slice ``y0(t) <= y <= y1(t)`` the heat-frame field gives

    V = w / (C(t) + (1/D) int_y^{y1} w),   u = V + beta,
    x(y, t) = int_{y0}^{y} u dy',          s(t) = x(y1(t), t).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import InsufficientDataError, InversionSingularityError, InvalidInputError
from .volterra import _flux, _node_index, get_slice, invert_trace


@dataclass
class PhysicalSolution:
    """Parametric slices ``(x, u)`` at each time and the front ``s``.

    ``theta`` is the fractional position ``(y - y0) / (y1 - y0)`` shared by
    all slices; ``yslices`` keep the heat-frame abscissae for diagnostics.
    """

    times: np.ndarray
    x: list
    u: list
    s: np.ndarray
    beta: float
    D: float
    yslices: list = field(default_factory=list)
    wslices: list = field(default_factory=list)
    w0: np.ndarray = None
    segment_starts: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def u_at(self, k, xq):
        """Linear interpolation of slice ``k`` at ``xq``."""
        return np.interp(xq, self.x[k], self.u[k])


def invert_state(state, tp, p, t, Ny=65):
    """``(x, u, s)`` at node ``t`` from a converged state."""
    n = _node_index(state, t)
    return _invert_node(state, tp, p, n, Ny)[:3]


def _invert_node(state, tp, p, n, Ny):
    if Ny < 3:
        raise InvalidInputError("Ny must be at least 3")
    if n == 0:
        ys = np.linspace(tp.C1, tp.C2, Ny)
        w = tp.F_at(ys)
        w[-1] = 0.0
        C = 1.0
    else:
        ys, w = get_slice(state, tp, p, n, Ny)
        C = state.C_of_t[n]
    V, denom = invert_trace(ys, w, C, tp.D)
    if np.any(denom <= 0):
        raise InversionSingularityError(f"C(t) + (1/D) int w <= 0 at t={state.times[n]:g}")
    u = V + tp.beta
    x = cumulative_simpson(u, x=ys, initial=0.0)
    if np.any(np.diff(x) <= 0):
        raise InversionSingularityError(f"x is not increasing along the slice at t={state.times[n]:g}")
    return x, u, float(x[-1]), ys, w


def invert_solution(state, tp, p, Ny=65, stride=1):
    """Invert every ``stride``-th node (the last node is always included)."""
    idx = list(range(0, state.grid.N + 1, stride))
    if idx[-1] != state.grid.N:
        idx.append(state.grid.N)
    xs, us, ss, ys_, ws_ = [], [], [], [], []
    for n in idx:
        x, u, s, ys, w = _invert_node(state, tp, p, n, Ny)
        xs.append(x)
        us.append(u)
        ss.append(s)
        ys_.append(ys)
        ws_.append(w)
    return PhysicalSolution(
        times=state.times[idx],
        x=xs,
        u=us,
        s=np.array(ss),
        beta=tp.beta,
        D=tp.D,
        yslices=ys_,
        wslices=ws_,
        w0=state.w0[idx],
        segment_starts=[0],
    )


def invert_chain(chain, p, Ny=65, stride=1):
    """Stitch the inverted segments of a chain; join times appear once."""
    parts = [invert_solution(seg.state, seg.tp, p, Ny, stride) for seg in chain]
    first = parts[0]
    starts = [0]
    for part in parts[1:]:
        starts.append(len(first.times) - 1)
        first.times = np.concatenate((first.times, part.times[1:]))
        first.s = np.concatenate((first.s, part.s[1:]))
        first.w0 = np.concatenate((first.w0, part.w0[1:]))
        for name in ("x", "u", "yslices", "wslices"):
            getattr(first, name).extend(getattr(part, name)[1:])
    first.segment_starts = starts
    return first


def _three_point(x0, x1, x2, f0, f1, f2, at):
    """Derivatives of the quadratic through three points, evaluated at ``at``.

    Returns ``(f', f'')``; exact for quadratics on any spacing.
    """
    d01 = (f1 - f0) / (x1 - x0)
    d12 = (f2 - f1) / (x2 - x1)
    f2nd = 2.0 * (d12 - d01) / (x2 - x0)
    f1st = d01 + 0.5 * f2nd * (2.0 * at - x0 - x1)
    return f1st, f2nd


@dataclass
class ResidualReport:
    """Sup-norms of the residuals of the physical problem and of the heat-frame flux condition.

    ``flux_a`` uses ``D w_y - g w - beta g w0 + w^2/w0``; ``flux_b`` the variant
    ``D w_y - g w + (1/D) w^2/w0 - beta g w0``.
    """

    pde: float
    neumann: float
    dirichlet: float
    stefan: float
    flux_a: float
    flux_b: float
    per_time: dict = field(default_factory=dict)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("pde", "neumann", "dirichlet", "stefan", "flux_a", "flux_b")}


def residual_report(sol: PhysicalSolution, state, p, tp=None, margin=0.0, t_min=None) -> ResidualReport:
    """Finite-difference residuals of the original problem on the parametric slices.

    Time derivatives are taken along fixed fractional slice positions and
    converted to fixed ``x`` with ``u_t|_x = u_t|_theta - u_x x_t|_theta``.
    ``sol`` must come from a single uniform-in-time state (not a chain).

    The PDE residual skips the slice end points, plus the fraction
    ``margin`` of points next to each end; its sup-norm only covers times
    ``>= t_min`` (default: all).  Both knobs let a refinement study look past
    boundary and start-up layers, where second differences of an accurate
    solution do not converge in the sup-norm.  ``per_time`` always covers
    every slice.
    """
    K = len(sol.times)
    if K < 3:
        raise InsufficientDataError(f"need at least 3 time slices, got {K}")
    D, beta = sol.D, sol.beta
    g = _flux(tp, p) if tp is not None else p.g
    t_loc = sol.times - sol.times[0]
    dt = np.diff(sol.times)
    if np.ptp(dt) > 1e-9 * dt.mean():
        raise InvalidInputError("residual_report needs uniformly spaced slices")
    h = dt.mean()
    X = np.array(sol.x)
    U = np.array(sol.u)
    Ny = X.shape[1]
    if Ny < 3:
        raise InsufficientDataError("need at least 3 points per slice")

    # slice derivatives
    ux = np.empty_like(U)
    uxx = np.empty_like(U)
    for i in range(Ny):
        j = min(max(i - 1, 0), Ny - 3)
        a, b_ = _three_point(X[:, j], X[:, j + 1], X[:, j + 2], U[:, j], U[:, j + 1], U[:, j + 2], X[:, i])
        ux[:, i], uxx[:, i] = a, b_
    # time derivative along fixed theta, centred
    ut_theta = (U[2:] - U[:-2]) / (2 * h)
    xt_theta = (X[2:] - X[:-2]) / (2 * h)
    ut = ut_theta - ux[1:-1] * xt_theta
    rhs = U[1:-1] ** 2 * (D * uxx[1:-1] - ux[1:-1])
    if not 0.0 <= margin < 0.5:
        raise InvalidInputError(f"margin must lie in [0, 0.5), got {margin}")
    skip = max(1, int(np.ceil(margin * (Ny - 1))))
    if Ny - 2 * skip < 1:
        raise InsufficientDataError("margin leaves no interior points")
    pde_t = np.max(np.abs(ut - rhs)[:, skip:Ny - skip], axis=1)
    keep = np.ones(len(pde_t), dtype=bool) if t_min is None else sol.times[1:-1] >= t_min
    if not np.any(keep):
        raise InsufficientDataError(f"no interior time slice at or after t_min={t_min}")

    gt = np.asarray(g(t_loc), dtype=float)
    neu_t = np.abs(D * ux[:, 0] - gt)
    dir_t = np.abs(U[:, -1] - beta)
    sdot = np.gradient(sol.s, sol.times, edge_order=2)
    ste_t = np.abs(D * ux[:, -1] - U[:, -1] + sdot)

    fa, fb = [], []
    for k in range(K):
        ys, w = sol.yslices[k], sol.wslices[k]
        wy, _ = _three_point(ys[0], ys[1], ys[2], w[0], w[1], w[2], ys[0])
        w0 = sol.w0[k]
        w_ = w[0]
        fa.append(abs(D * wy - gt[k] * w_ - beta * gt[k] * w0 + w_**2 / w0))
        fb.append(abs(D * wy - gt[k] * w_ + w_**2 / (D * w0) - beta * gt[k] * w0))
    per = {
        "t": sol.times,
        "pde": np.concatenate(([np.nan], pde_t, [np.nan])),
        "neumann": neu_t,
        "dirichlet": dir_t,
        "stefan": ste_t,
        "flux_a": np.array(fa),
        "flux_b": np.array(fb),
    }
    return ResidualReport(
        pde=float(np.max(pde_t[keep])),
        neumann=float(np.max(neu_t)),
        dirichlet=float(np.max(dir_t)),
        stefan=float(np.max(ste_t)),
        flux_a=float(np.max(fa)),
        flux_b=float(np.max(fb)),
        per_time=per,
    )
