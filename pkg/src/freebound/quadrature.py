"""Quadrature on the time grid and on space slices.

Three integral classes appear in the solver: smooth space integrals,
history integrals with a ``(t - tau)^{-1/2}`` singularity, and history
integrals for the field at interior points, where the kernels form thin
layers near a moving boundary.  The last class uses Gauss-Legendre panels in
``u = sqrt(t - tau)`` graded geometrically towards both ends.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import InvalidInputError

MIN_NODES = 8


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j * sigma / N`` on ``[0, sigma]``, ``t0`` the absolute offset."""

    sigma: float
    N: int
    t0: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidInputError(f"sigma must be positive and finite, got {self.sigma}")
        if int(self.N) != self.N or self.N < MIN_NODES:
            raise InvalidInputError(f"need an integer N >= {MIN_NODES}, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self):
        return self.sigma / self.N

    @property
    def nodes(self):
        return np.arange(self.N + 1) * self.h

    @property
    def midpoints(self):
        return (np.arange(self.N) + 0.5) * self.h

    def refined(self, factor=2):
        return TimeGrid(self.sigma, self.N * factor, self.t0)


def _check_samples(f, x):
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size < 3:
        raise InvalidInputError("need at least 3 samples")
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.shape != f.shape:
            raise InvalidInputError("abscissae and samples differ in length")
        if np.any(np.diff(x) <= 0):
            raise InvalidInputError("abscissae must be strictly increasing")
    return f, x


def integrate_space(f, x=None, dx=1.0):
    """Composite Simpson; with an even sample count the last cell is a trapezoid."""
    f, x = _check_samples(f, x)
    if f.size % 2 == 1:
        return float(simpson(f, x=x, dx=dx))
    head = simpson(f[:-1], x=None if x is None else x[:-1], dx=dx)
    tail = trapezoid(f[-2:], x=None if x is None else x[-2:], dx=dx)
    return float(head + tail)


def singular_weights(grid: TimeGrid):
    """``W[n, j] = int_{t_j}^{t_{j+1}} (t_n - tau)^{-1/2} dtau`` for ``j < n``, else 0.

    Shape ``(N+1, N)``; every entry is nonnegative.
    """
    t = grid.nodes
    lag = t[:, None] - t[None, :]
    root = np.sqrt(np.clip(lag, 0.0, None))
    W = 2.0 * (root[:, :-1] - root[:, 1:])
    return np.where(lag[:, 1:] >= 0, W, 0.0)


def integrate_singular_history(phi, kernel, n, grid: TimeGrid):
    """Product-midpoint rule for ``int_0^{t_n} phi(tau) k(t_n, tau) dtau``.

    ``kernel(t, tau)`` is the full kernel including its ``(t - tau)^{-1/2}``
    factor; ``phi`` holds the density at the N midpoints.  The smooth part
    ``phi * k * sqrt(t - tau)`` is sampled at midpoints and the singular factor
    is integrated exactly on each cell.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (grid.N,):
        raise InvalidInputError(f"phi must have one value per midpoint ({grid.N})")
    if n <= 0:
        return 0.0
    tn = grid.nodes[n]
    m = grid.midpoints[:n]
    W = singular_weights(grid)[n, :n]
    r = tn - m
    psi = phi[:n] * np.asarray(kernel(tn, m), dtype=float) * np.sqrt(r)
    return float(np.dot(W, psi))


@lru_cache(maxsize=8)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=32)
def graded_sqrt_rule(levels=24, order=8, top_levels=12):
    """Nodes ``u`` and weights on ``[0, 1]``, graded geometrically at both ends.

    ``[0, 1/2]`` is split into panels ``[2^-(k+1), 2^-k]`` down to
    ``2^-levels``; ``[1/2, 1]`` mirrors this towards 1 with ``top_levels``
    panels.  Each panel carries ``order`` Gauss-Legendre points.
    """
    xg, wg = _gauss_legendre(order)
    edges = [0.0] + [2.0**-k for k in range(levels, 0, -1)]
    edges += [1.0 - 2.0 ** -(k + 1) for k in range(1, top_levels + 1)] + [1.0]
    edges = np.array(edges)
    lo, hi = edges[:-1, None], edges[1:, None]
    u = (lo + (hi - lo) * xg[None, :]).ravel()
    w = ((hi - lo) * wg[None, :]).ravel()
    return u, w


def history_rule(span, levels=24, order=8, top_levels=12):
    """Quadrature for ``int_{t - span}^{t} f(tau) dtau`` through ``tau = t - u^2``.

    Returns lags ``r = u^2`` and weights including the Jacobian ``2u``.  The
    grading near ``r = 0`` resolves integrable ``r^{-1/2}`` singularities and
    thin layers of the heat kernels close to a boundary; the grading near
    ``r = span`` resolves start-up layers of the densities.
    """
    U = np.sqrt(span)
    u, w = graded_sqrt_rule(levels, order, top_levels)
    u = U * u
    return u * u, 2.0 * u * (U * w)
