import os
import subprocess
import sys
import warnings

import numpy as np
import pytest

from freebound import FrontFixGrid, HorizonWarning, TimeGrid, _hot, backend, outer_solve, set_backend, solve_frontfix
from freebound._accel import HAVE_NUMBA
from freebound.quadrature import history_rule, singular_weights

from helpers import transformed

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def both():
    prev = backend()

    def run(fn):
        out = {}
        for name in ("numpy", "numba"):
            set_backend(name)
            out[name] = fn()
        return out["numpy"], out["numba"]

    yield run
    set_backend(prev)


def kernel_inputs(N=24):
    rng = np.random.default_rng(1)
    grid = TimeGrid(0.05, N)
    t, m = grid.nodes, grid.midpoints
    y0, y1 = 0.2 - 0.1 * t, 0.95 + 0.3 * t
    return dict(t=t, m=m, W=singular_weights(grid), y0=y0, y1=y1, y0m=np.interp(m, t, y0),
                y1m=np.interp(m, t, y1), c1=rng.normal(size=N), c2=rng.normal(size=N), gw=rng.random(N))


def test_history_kernel(both):
    k = kernel_inputs()
    a, b = both(lambda: _hot.history_psi(k["t"], k["m"], k["W"], k["y0"], k["y1"], k["y0m"], k["y1m"],
                                          k["c1"], k["c2"], k["gw"], 0.8, 1.3))
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-13)


def test_space_kernel(both):
    ys = np.linspace(0.1, 1.0, 40)
    yk = np.linspace(0.2, 0.9, 301)
    a, b = both(lambda: _hot.space_pl(ys, np.full(40, 0.01), yk, np.sin(5 * yk), 1.1, -1.0))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_field_kernel(both):
    ys = np.linspace(0.15, 1.0, 17)
    r, wq = history_rule(0.05)
    shape = (17, len(r))
    tq = 0.05 - r
    at = lambda f: np.broadcast_to(f(tq), shape)  # noqa: E731
    a, b = both(lambda: _hot.field_history(
        ys, np.broadcast_to(r, shape), np.broadcast_to(wq, shape), at(lambda s: 0.2 - 0.1 * s),
        at(lambda s: 0.95 + 0.3 * s), at(np.cos), at(np.sin), at(lambda s: 0.05 + s), 0.9, 1.2))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_full_solve_and_oracle(both):
    p, tp, _ = transformed("quadratic")

    def solve():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HorizonWarning)
            return outer_solve(tp, p, TimeGrid(0.02, 16))

    a, b = both(solve)
    for name in ("chi1", "chi2", "w0", "y0", "y1"):
        np.testing.assert_allclose(getattr(a, name), getattr(b, name), rtol=1e-11, atol=1e-13)
    fa, fb = both(lambda: solve_frontfix(p, FrontFixGrid(Nx=40, T=0.02)))
    np.testing.assert_allclose(fa.s, fb.s, rtol=1e-13)
    np.testing.assert_allclose(fa.U, fb.U, rtol=1e-13)


def test_environment_selects_backend():
    code = "import freebound; print(freebound.backend())"
    for name in ("numpy", "numba"):
        env = dict(os.environ, FREEBOUND_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
        assert out.stdout.strip() == name
    env = dict(os.environ, FREEBOUND_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.returncode != 0 and "FREEBOUND_BACKEND" in out.stderr
    with pytest.raises(ValueError):
        set_backend("fortran")
