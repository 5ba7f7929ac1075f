"""Time the numpy and numba backends on the hot kernels and on a full solve.

    python3 benchmarks/bench_backends.py [--N 128] [--repeat 3]

Each kernel is called once per backend before timing so that numba
compilation (or loading from its cache) is excluded.  The last column is the
largest absolute difference between the two backends' outputs.
"""

import argparse
import time
import warnings

import numpy as np

from freebound import _hot, set_backend
from freebound.oracle import FrontFixGrid, solve_frontfix
from freebound.problem import FluxSpec, InitialProfile, PhysicalProblem, build_transformed_problem
from freebound.quadrature import TimeGrid, history_rule, singular_weights
from freebound.volterra import HorizonWarning, outer_solve


def problem():
    g0 = 0.05
    u0 = InitialProfile.compatible_quadratic(1.0, 1.0, g0, 1.0, 0.5)
    return PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.linear(g0, g0), u0)


def kernel_cases(N):
    rng = np.random.default_rng(0)
    grid = TimeGrid(0.05, N)
    t, m = grid.nodes, grid.midpoints
    W = singular_weights(grid)
    y0 = 0.2 - 0.1 * t
    y1 = 0.95 + 0.3 * t
    y0m, y1m = np.interp(m, t, y0), np.interp(m, t, y1)
    c1, c2, gw = -1.0 + 0.1 * rng.random(N), 0.6 + 0.1 * rng.random(N), 0.05 * np.ones(N)
    ys = np.linspace(y0[-1], y1[-1], 65)
    yk = np.linspace(0.2, 0.95, 401)
    fk = np.cos(yk)
    r, wq = history_rule(t[-1])
    shape = (len(ys), len(r))
    tq = t[-1] - r

    def at(v):
        return np.broadcast_to(np.interp(tq, t, v), shape)

    return {
        "history_psi": lambda: _hot.history_psi(t, m, W, y0, y1, y0m, y1m, c1, c2, gw, 1.0, 1.0),
        "space_pl": lambda: _hot.space_pl(ys, np.full(ys.shape, t[-1]), yk, fk, 1.0, 1.0),
        "field_history": lambda: _hot.field_history(
            ys, np.broadcast_to(r, shape), np.broadcast_to(wq, shape), at(y0), at(y1),
            at(np.interp(t, m, c1)), at(np.interp(t, m, c2)), np.broadcast_to(0.05, shape), 1.0, 1.0),
    }


def timed(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(np.asarray(o, dtype=float)) for o in out if np.ndim(o) > 0])
    if hasattr(out, "chi1"):
        return np.concatenate((out.chi1, out.chi2, out.w0))
    if hasattr(out, "s"):
        return np.asarray(out.s)
    return np.ravel(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=128, help="time cells")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    p = problem()
    tp = build_transformed_problem(p)
    cases = kernel_cases(args.N)
    cases["outer_solve"] = lambda: outer_solve(tp, p, TimeGrid(0.05, args.N))
    cases["frontfix"] = lambda: solve_frontfix(p, FrontFixGrid(Nx=200, T=0.05))

    warnings.simplefilter("ignore", HorizonWarning)
    print(f"{'case':<14s}{'numpy [s]':>12s}{'numba [s]':>12s}{'speed-up':>10s}{'max diff':>12s}")
    for name, fn in cases.items():
        res = {}
        for b in ("numpy", "numba"):
            set_backend(b)
            res[b] = timed(fn, 1 if name == "outer_solve" else args.repeat)
        diff = np.max(np.abs(flat(res["numpy"][1]) - flat(res["numba"][1])))
        tn, tb = res["numpy"][0], res["numba"][0]
        print(f"{name:<14s}{tn:12.4f}{tb:12.4f}{tn / tb:10.1f}{diff:12.2e}")


if __name__ == "__main__":
    main()
