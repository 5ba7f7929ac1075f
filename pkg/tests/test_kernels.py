import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from freebound import InvalidInputError, KernelQuery, UnsupportedOperationError, eval_image_kernel, eval_K
from freebound.kernels import heat_kernel, image_kernel

RNG = np.random.default_rng(7)


def test_zero_before_source_time():
    assert eval_K(KernelQuery(x=1, t=1, xi=0, tau=2, D=1)) == 0.0
    assert eval_K(KernelQuery(x=1, t=1, xi=0, tau=1, D=1)) == 0.0


def test_peak_value():
    r = 1.0 / (4.0 * math.pi)
    assert eval_K(KernelQuery(x=0.3, t=r, xi=0.3, tau=0.0, D=1)) == pytest.approx(1.0, abs=1e-15)


def test_against_arbitrary_precision():
    mpmath.mp.dps = 40
    exact = mpmath.mpf("0.5") / mpmath.sqrt(mpmath.pi) * mpmath.exp(mpmath.mpf("-0.25"))
    got = eval_K(KernelQuery(x=1, t=1, xi=0, tau=0, D=1))
    assert got == pytest.approx(float(exact), rel=1e-14)
    assert got == pytest.approx(0.21970, abs=1e-5)


def test_underflow_is_exact_zero():
    assert heat_kernel(100.0, 1e-3, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("bad", [dict(D=0.0), dict(D=-1.0), dict(x=math.nan), dict(t=math.inf)])
def test_invalid_queries(bad):
    args = dict(x=0.0, t=1.0, xi=0.0, tau=0.0, D=1.0) | bad
    with pytest.raises(InvalidInputError):
        KernelQuery(**args)


def test_unsupported_selector():
    q = KernelQuery(0.1, 1.0, 0.2, 0.0)
    with pytest.raises(UnsupportedOperationError):
        eval_image_kernel("dirichlet", "none", q)
    with pytest.raises(UnsupportedOperationError):
        eval_image_kernel("green", "d_t", q)


@pytest.mark.parametrize("D", [0.3, 1.0, 1.7])
@pytest.mark.parametrize("r", [0.01, 0.2, 3.0])
def test_normalization(D, r):
    sd = math.sqrt(2 * D * r)
    total, _ = quad(lambda xi: heat_kernel(0.4, r, xi, 0.0, D), 0.4 - 10 * sd, 0.4 + 10 * sd,
                    epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(total - 1.0) <= 1e-8


def test_symmetry_and_reflections():
    x, xi = RNG.uniform(-2, 2, 50), RNG.uniform(-2, 2, 50)
    t, tau = RNG.uniform(0.5, 2, 50), RNG.uniform(0, 0.4, 50)
    np.testing.assert_allclose(heat_kernel(x, t, xi, tau, 0.7), heat_kernel(xi, t, x, tau, 0.7), rtol=1e-14)
    G = image_kernel("green", "none", x, t, xi, tau, 0.7)
    Gm = image_kernel("green", "none", -x, t, xi, tau, 0.7)
    N = image_kernel("neumann", "none", x, t, xi, tau, 0.7)
    Nm = image_kernel("neumann", "none", -x, t, xi, tau, 0.7)
    np.testing.assert_allclose(G + Gm, 0.0, atol=1e-15)
    np.testing.assert_allclose(N, Nm, rtol=1e-14)


def test_boundary_values_at_zero():
    xi = RNG.uniform(0.01, 3, 20)
    assert np.all(image_kernel("green", "none", 0.0, 1.3, xi, 0.2, 1.1) == 0.0)
    assert np.all(image_kernel("neumann", "d_x", 0.0, 1.3, xi, 0.2, 1.1) == 0.0)


def test_heat_equation_residual():
    h = 1e-4
    for _ in range(20):
        x, xi, D = RNG.uniform(-1, 1), RNG.uniform(-1, 1), RNG.uniform(0.2, 1.8)
        tau = 0.0
        t = RNG.uniform(0.01, 1.0)
        K = lambda a, b: heat_kernel(a, b, xi, tau, D)  # noqa: E731
        # fourth-order stencils keep truncation well below the tolerance at t - tau = 0.01
        kt = (-K(x, t + 2 * h) + 8 * K(x, t + h) - 8 * K(x, t - h) + K(x, t - 2 * h)) / (12 * h)
        kxx = (-K(x + 2 * h, t) + 16 * K(x + h, t) - 30 * K(x, t) + 16 * K(x - h, t) - K(x - 2 * h, t)) / (12 * h**2)
        assert abs(kt - D * kxx) <= 1e-4


def _fd(kind, wrt, x, t, xi, tau, D, h=1e-5):
    base = dict(x=x, t=t, xi=xi, tau=tau)
    lo, hi = dict(base), dict(base)
    lo[wrt] -= h
    hi[wrt] += h
    f = lambda a: image_kernel(kind, "none", a["x"], a["t"], a["xi"], a["tau"], D)  # noqa: E731
    return (f(hi) - f(lo)) / (2 * h)


@pytest.mark.parametrize("kind", ["green", "neumann"])
@pytest.mark.parametrize("deriv,wrt", [("d_x", "x"), ("d_xi", "xi"), ("d_tau", "tau")])
def test_derivatives_match_differences(kind, deriv, wrt):
    for _ in range(25):
        x, xi = RNG.uniform(-1.5, 1.5), RNG.uniform(-1.5, 1.5)
        D = RNG.uniform(0.3, 1.8)
        tau = RNG.uniform(0, 0.5)
        t = tau + RNG.uniform(0.01, 1.0)
        exact = image_kernel(kind, deriv, x, t, xi, tau, D)
        approx = _fd(kind, wrt, x, t, xi, tau, D)
        assert abs(exact - approx) <= 1e-6 * max(abs(exact), 1e-3)


@pytest.mark.parametrize("kind", ["green", "neumann"])
def test_second_derivative(kind):
    h = 1e-4
    for _ in range(10):
        x, xi, D = RNG.uniform(-1, 1), RNG.uniform(-1, 1), RNG.uniform(0.3, 1.8)
        t = RNG.uniform(0.05, 1.0)
        f = lambda a: image_kernel(kind, "none", a, t, xi, 0.0, D)  # noqa: E731
        approx = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        exact = image_kernel(kind, "d_xx", x, t, xi, 0.0, D)
        assert abs(exact - approx) <= 1e-5 * max(abs(exact), 1e-2)


def test_green_tau_derivative_example():
    q = KernelQuery(x=2, t=1, xi=1, tau=0.5, D=1)
    h = 1e-5
    fd = (eval_image_kernel("green", "none", KernelQuery(2, 1, 1, 0.5 + h, 1))
          - eval_image_kernel("green", "none", KernelQuery(2, 1, 1, 0.5 - h, 1))) / (2 * h)
    got = eval_image_kernel("green", "d_tau", q)
    assert abs(got - fd) <= 1e-6 * abs(fd)
