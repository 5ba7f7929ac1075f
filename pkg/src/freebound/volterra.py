"""Boundary-density formulation in the heat frame.

Unknowns are the densities ``chi1(t) = w_y(y1(t), t)`` and
``chi2(t) = w(y0(t), t)`` together with the scalar function ``w0(t)``.
Given them, the free boundaries follow in closed form:

    y0(t) = C1 - beta t - int_0^t g + int_0^t chi2 / w0
    y1(t) = C2 + (1 - beta) t + (D (beta + 1) / beta^2) log(1 - int_0^t chi1)

and the field ``w`` is a sum of heat potentials.  Taking boundary limits of
that representation gives a pair of second-kind Volterra equations
``chi = Psi(chi)``, solved here by Picard iteration over the whole time grid.
An outer iteration makes ``w0 = C(t) + (1/D) int_{y0}^{y1} w`` consistent.

Discretisation: densities are stored at cell midpoints.  ``Psi`` is
evaluated at the nodes with the product-midpoint rule and averaged back to
the midpoints, so no kernel is ever evaluated at ``tau = t``.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import erfc

from . import _hot
from .constants import compute_constants
from .errors import (
    DegenerateGeometryError,
    HorizonExceededError,
    InvalidInputError,
    NoConvergenceError,
    OutOfDomainError,
    PartialResultError,
)
from .kernels import heat_kernel
from .problem import TransformedProblem, centered_slopes, hopf_cole_trace
from .quadrature import TimeGrid, history_rule, integrate_space, singular_weights

JUMPS = ("exact", "printed")


class HorizonWarning(UserWarning):
    """The time horizon exceeds the certified ``sigma_star``."""


def jump_factor(D, jump="exact"):
    """Coefficient in front of both density equations.

    ``exact`` is the value 2 implied by the half-density jump of single and
    double layer heat potentials; ``printed`` is ``2/(2-D)``.  They agree at
    ``D = 1``.
    """
    if jump == "exact":
        return 2.0
    if jump == "printed":
        return 2.0 / (2.0 - D)
    raise InvalidInputError(f"jump must be one of {JUMPS}, got {jump!r}")


def _flux(tp, p):
    return p.g.shifted(tp.t0) if tp.t0 else p.g


@dataclass
class Boundaries:
    y0: np.ndarray
    y1: np.ndarray
    y0_mid: np.ndarray
    y1_mid: np.ndarray
    C: np.ndarray

    def __iter__(self):
        yield self.y0
        yield self.y1


def free_boundaries(chi1, chi2, w0, g, grid: TimeGrid, tp: TransformedProblem) -> Boundaries:
    """Closed-form boundaries at nodes and midpoints from midpoint densities.

    History integrals use the midpoint rule; ``int g`` is exact.
    """
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    h = grid.h
    t, m = grid.nodes, grid.midpoints
    w0m = 0.5 * (w0[:-1] + w0[1:])
    A = np.concatenate(([0.0], np.cumsum(chi1 * h)))
    Am = A[:-1] + 0.5 * h * chi1
    q = chi2 / w0m
    Q = np.concatenate(([0.0], np.cumsum(q * h)))
    Qm = Q[:-1] + 0.5 * h * q
    arg, argm = 1.0 - A, 1.0 - Am
    if np.any(arg <= 0) or np.any(argm <= 0):
        bad = t[np.argmax(arg <= 0)] if np.any(arg <= 0) else m[np.argmax(argm <= 0)]
        raise HorizonExceededError(f"1 - int chi1 reached zero near t={bad:.6g}; shorten the horizon")
    D, beta = tp.D, tp.beta
    lam = D * (beta + 1.0) / beta**2
    y0 = tp.C1 - beta * t - g.integral(t) + Q
    y1 = tp.C2 + (1.0 - beta) * t + lam * np.log(arg)
    y0m = tp.C1 - beta * m - g.integral(m) + Qm
    y1m = tp.C2 + (1.0 - beta) * m + lam * np.log(argm)
    return Boundaries(y0, y1, y0m, y1m, arg)


@dataclass
class PsiResult:
    chi1: np.ndarray
    chi2: np.ndarray
    nodes1: np.ndarray
    nodes2: np.ndarray

    def __iter__(self):
        yield self.chi1
        yield self.chi2


class _Workspace:
    """Per-grid quantities reused across sweeps."""

    def __init__(self, tp, p, grid):
        # holding tp and p keeps their ids from being recycled while cached
        self.tp, self.p = tp, p
        self.grid = grid
        self.t = grid.nodes
        self.m = grid.midpoints
        self.W = singular_weights(grid)
        self.g = _flux(tp, p)
        self.g_mid = np.asarray(self.g(self.m), dtype=float)
        self.g_nodes = np.asarray(self.g(self.t), dtype=float)


_WS_CACHE = {}


def _workspace(tp, p, grid):
    key = (id(tp), id(p), grid)
    ws = _WS_CACHE.get(key)
    if ws is None:
        if len(_WS_CACHE) > 16:
            _WS_CACHE.clear()
        ws = _WS_CACHE[key] = _Workspace(tp, p, grid)
    return ws


def apply_psi(chi1, chi2, w0, bnd: Boundaries, tp, p, grid, jump="exact") -> PsiResult:
    """One application of the density map.

    Returns midpoint densities (what the iteration consumes) and the nodal
    values they were averaged from.
    """
    ws = _workspace(tp, p, grid)
    J = jump_factor(tp.D, jump)
    D, beta = tp.D, tp.beta
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    gw = ws.g_mid * 0.5 * (w0[:-1] + w0[1:])
    S1, S2 = _hot.history_psi(ws.t, ws.m, ws.W, bnd.y0, bnd.y1, bnd.y0_mid, bnd.y1_mid, chi1, chi2, gw, D, beta)
    tn = ws.t[1:]
    y1n, y0n = bnd.y1[1:], bnd.y0[1:]
    corner = heat_kernel(y1n, tn, tp.C1, 0.0, D) - heat_kernel(-y1n, tn, tp.C1, 0.0, D)
    src1 = corner * tp.F[0] + _hot.space_pl(y1n, tn, tp.y, tp.dF, D, -1.0)
    src2 = _hot.space_pl(y0n, tn, tp.y, tp.F, D, 1.0)
    nodes1 = np.empty(grid.N + 1)
    nodes2 = np.empty(grid.N + 1)
    # t -> 0+: each boundary sits at the edge of the initial support and sees half the mass
    nodes1[0] = 0.5 * J * tp.dF[-1]
    nodes2[0] = 0.5 * J * tp.F[0]
    nodes1[1:] = J * (src1 + S1[1:])
    nodes2[1:] = J * (src2 + S2[1:])
    return PsiResult(0.5 * (nodes1[:-1] + nodes1[1:]), 0.5 * (nodes2[:-1] + nodes2[1:]), nodes1, nodes2)


@dataclass
class DensityState:
    """Converged (or last) iterate of the density system on one grid."""

    grid: TimeGrid
    chi1: np.ndarray
    chi2: np.ndarray
    w0: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    C_of_t: np.ndarray
    chi1_nodes: np.ndarray
    chi2_nodes: np.ndarray
    y0_mid: np.ndarray
    y1_mid: np.ndarray
    jump: str = "exact"
    history: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    outer_history: list = field(default_factory=list)
    slices: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.history)

    @property
    def times(self):
        return self.grid.t0 + self.grid.nodes

    @property
    def boundaries(self):
        return Boundaries(self.y0, self.y1, self.y0_mid, self.y1_mid, self.C_of_t)


def _sup(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def inner_solve(w0, tp, p, grid, tol=1e-10, max_iter=200, chi_init=None, jump="exact") -> DensityState:
    """Picard iteration ``chi <- Psi(chi)`` for fixed ``w0``.

    Starts from ``chi = (0, 0)`` unless ``chi_init`` is given; boundaries are
    recomputed on every sweep.  ``history`` holds the sup-norm of each update
    and ``ratios`` the successive quotients.
    """
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (grid.N + 1,):
        raise InvalidInputError(f"w0 must have one value per node ({grid.N + 1})")
    if chi_init is None:
        chi1 = np.zeros(grid.N)
        chi2 = np.zeros(grid.N)
    else:
        chi1, chi2 = (np.array(c, dtype=float) for c in chi_init)
    g = _workspace(tp, p, grid).g
    history, ratios = [], []
    res = None
    for _ in range(max_iter):
        bnd = free_boundaries(chi1, chi2, w0, g, grid, tp)
        res = apply_psi(chi1, chi2, w0, bnd, tp, p, grid, jump)
        delta = max(_sup(res.chi1 - chi1), _sup(res.chi2 - chi2))
        if history:
            ratios.append(delta / history[-1] if history[-1] > 0 else 0.0)
        history.append(delta)
        chi1, chi2 = res.chi1, res.chi2
        if delta <= tol:
            break
    else:
        st = _make_state(grid, chi1, chi2, w0, g, tp, res, jump, history, ratios)
        raise NoConvergenceError(
            f"inner Picard iteration did not reach tol={tol:g} in {max_iter} sweeps "
            f"(last update {history[-1]:.3e})",
            history,
            ratios,
            st,
        )
    return _make_state(grid, chi1, chi2, w0, g, tp, res, jump, history, ratios)


def _make_state(grid, chi1, chi2, w0, g, tp, res, jump, history, ratios):
    bnd = free_boundaries(chi1, chi2, w0, g, grid, tp)
    return DensityState(
        grid=grid,
        chi1=chi1,
        chi2=chi2,
        w0=w0.copy(),
        y0=bnd.y0,
        y1=bnd.y1,
        C_of_t=bnd.C,
        chi1_nodes=res.nodes1,
        chi2_nodes=res.nodes2,
        y0_mid=bnd.y0_mid,
        y1_mid=bnd.y1_mid,
        jump=jump,
        history=list(history),
        ratios=list(ratios),
    )


def _node_index(state, t):
    grid = state.grid
    n = int(round(t / grid.h))
    if n < 0 or n > grid.N or abs(n * grid.h - t) > 1e-9 * max(grid.h, abs(t)):
        raise OutOfDomainError(f"t={t!r} is not a node of the grid (h={grid.h:g})")
    return n


def field_slice(state, tp, p, n, ys, pin=False):
    """``w(ys, t_n)`` from the heat-potential representation.

    History integrals use a graded rule in ``sqrt(t_n - tau)``.  Points
    within round-off of ``y0(t_n)`` take the limit from inside, which adds
    half the double-layer density.  ``pin`` enforces ``w(y1) = 0`` exactly by
    subtracting ``w(y1) erfc((y1 - y) / (2 sqrt(D t_n)))``.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if n == 0:
        return tp.F_at(ys)
    ws = _workspace(tp, p, state.grid)
    D, beta = tp.D, tp.beta
    t = ws.t
    tn = t[n]
    out = _hot.space_pl(ys, np.full(ys.shape, tn), tp.y, tp.F, D, 1.0)

    y0n, y1n = state.y0[n], state.y1[n]
    at0 = np.abs(ys - y0n) <= 1e-13 * (1.0 + abs(y0n))
    at1 = np.abs(ys - y1n) <= 1e-13 * (1.0 + abs(y1n))
    # graded rule over the whole history; the densities are interpolated
    # linearly between their nodal values
    r, wq = history_rule(tn)
    tq = tn - r
    shape = (len(ys), len(r))

    def at(v):
        return np.broadcast_to(np.interp(tq, t, v), shape)

    gq = np.asarray(ws.g(tq), dtype=float) * np.interp(tq, t, state.w0)
    out += _hot.field_history(
        ys, np.broadcast_to(r, shape), np.broadcast_to(wq, shape), at(state.y0), at(state.y1),
        at(state.chi1_nodes), at(state.chi2_nodes), np.broadcast_to(gq, shape), D, beta,
    )
    # boundary limit of the double layer from inside
    out[at0] += 0.5 * state.chi2_nodes[n]
    if pin:
        # the computed w(y1) is a small discretisation error; remove it with the
        # heat profile that a boundary value switched on at t = 0 would leave
        w_end = out[at1][0] if np.any(at1) else field_slice(state, tp, p, n, np.array([y1n]))[0]
        out -= w_end * erfc((y1n - ys) / (2.0 * math.sqrt(D * tn)))
        out[at1] = 0.0
    return out


def reconstruct_w(state, tp, p, y, t):
    """Field value(s) ``w(y, t)`` at a grid node ``t`` and ``y0(t) <= y <= y1(t)``."""
    n = _node_index(state, t)
    y = np.asarray(y, dtype=float)
    lo, hi = state.y0[n], state.y1[n]
    slack = 1e-12 * (1.0 + abs(hi))
    if np.any(y < lo - slack) or np.any(y > hi + slack):
        raise OutOfDomainError(f"y outside [{lo:.12g}, {hi:.12g}] at t={t:g}")
    out = field_slice(state, tp, p, n, np.clip(y, lo, hi))
    return float(out[0]) if y.ndim == 0 else out


def slice_grid(state, n, Ny):
    return np.linspace(state.y0[n], state.y1[n], Ny)


def get_slice(state, tp, p, n, Ny):
    """Cached pinned slice ``(ys, w)`` at node ``n``."""
    key = (n, Ny)
    got = state.slices.get(key)
    if got is None:
        ys = slice_grid(state, n, Ny)
        got = state.slices[key] = (ys, field_slice(state, tp, p, n, ys, pin=True))
    return got


def phi_update(state, tp, p, Ny=65):
    """``C(t) + (1/D) int_{y0}^{y1} w`` at every node, Simpson on an ``Ny``-point slice."""
    out = np.empty(state.grid.N + 1)
    for n in range(state.grid.N + 1):
        ys, w = get_slice(state, tp, p, n, Ny)
        out[n] = state.C_of_t[n] + integrate_space(w, ys) / tp.D
    return out


def _upper_box(tp, p):
    try:
        led = compute_constants(tp, p)
    except DegenerateGeometryError:
        return math.inf, None
    return led.R, led


def outer_solve(tp, p, grid, tol_outer=1e-8, relax=1.0, max_outer=50, tol=1e-10, max_iter=200,
                Ny=65, jump="exact", warm_start=True) -> DensityState:
    """Fixed point ``w0 = phi(w0)`` with relaxation, each step an inner solve.

    Iterates are clamped to ``[1, R]`` before reuse.  With ``warm_start`` the
    inner iteration starts from the previous densities instead of zero.
    """
    if not 0 < relax <= 1:
        raise InvalidInputError(f"relax must lie in (0, 1], got {relax}")
    R, led = _upper_box(tp, p)
    if led is not None and grid.sigma > led.sigma_star:
        warnings.warn(
            f"horizon {grid.sigma:g} exceeds sigma_star={led.sigma_star:.3e}; "
            "the contraction guarantee does not apply",
            HorizonWarning,
            stacklevel=2,
        )
    w0 = np.ones(grid.N + 1)
    chi = None
    hist = []
    st = None
    for _ in range(max_outer):
        try:
            st = inner_solve(w0, tp, p, grid, tol, max_iter, chi if warm_start else None, jump)
        except NoConvergenceError as exc:
            exc.args = (f"{exc.args[0]} during outer step {len(hist) + 1}; try a smaller sigma",)
            raise
        phi = phi_update(st, tp, p, Ny)
        res = _sup(phi - w0)
        hist.append(res)
        st.outer_history = list(hist)
        if res <= tol_outer:
            return st
        w0 = np.clip((1.0 - relax) * w0 + relax * phi, 1.0, R)
        chi = (st.chi1, st.chi2)
    raise NoConvergenceError(
        f"outer iteration did not reach tol_outer={tol_outer:g} in {max_outer} steps "
        f"(last residual {hist[-1]:.3e}); try a smaller sigma or relax",
        hist,
        [b / a if a > 0 else 0.0 for a, b in zip(hist, hist[1:])],
        st,
    )


def invert_trace(ys, w, C, D):
    """Undo the Hopf-Cole step on a slice: ``V = w / (C + (1/D) int_y^{y1} w)``."""
    head = cumulative_simpson(w, x=ys, initial=0.0)
    denom = C + (head[-1] - head) / D
    return w / denom, denom


@dataclass
class Segment:
    tp: TransformedProblem
    state: DensityState

    @property
    def t0(self):
        return self.tp.t0

    @property
    def t_end(self):
        return self.tp.t0 + self.state.grid.sigma


def restart_problem(state, tp, p, n_table=None) -> TransformedProblem:
    """Heat-frame data for a new segment starting at the last node of ``state``."""
    n_table = n_table or len(tp.y)
    N = state.grid.N
    ys = slice_grid(state, N, n_table)
    w = field_slice(state, tp, p, N, ys, pin=True)
    V0, _ = invert_trace(ys, w, state.C_of_t[N], tp.D)
    V0[-1] = 0.0
    F = hopf_cole_trace(ys, V0, tp.D)
    v = V0 + tp.beta
    t_new = tp.t0 + state.grid.sigma
    g = p.g.shifted(t_new)
    return TransformedProblem(
        C1=float(ys[0]),
        C2=float(ys[-1]),
        y=ys,
        V0=V0,
        F=F,
        dF=centered_slopes(F, ys),
        D=tp.D,
        beta=tp.beta,
        u0_norm=float(np.max(np.abs(v))),
        du0_norm=float(np.max(np.abs(centered_slopes(V0, ys) / v))),
        g_norm=g.sup_norm(),
        t0=t_new,
    )


def extend_solution(state, tp, p, T, segment=None, **solve_kw):
    """Chain segments until the cumulative horizon reaches ``T``.

    Each new segment restarts from the field at the end of the previous one.
    ``segment`` fixes the segment length (default: that of ``state``); the
    last segment is shortened to end exactly at ``T``.  Returns a list of
    :class:`Segment`.
    """
    seg_len = segment or state.grid.sigma
    N = state.grid.N
    chain = [Segment(tp, state)]
    eps = 1e-9 * seg_len
    while chain[-1].t_end < T - eps:
        last = chain[-1]
        length = min(seg_len, T - last.t_end)
        try:
            tp_new = restart_problem(last.state, last.tp, p)
            grid = TimeGrid(length, N, tp_new.t0)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", HorizonWarning)
                st = outer_solve(tp_new, p, grid, **solve_kw)
        except (NoConvergenceError, HorizonExceededError, DegenerateGeometryError) as exc:
            raise PartialResultError(
                f"segment {len(chain) + 1} starting at t={last.t_end:g} failed: {exc}", chain, exc
            ) from exc
        chain.append(Segment(tp_new, st))
    return chain
