"""Heat kernel on the line and its half-line Green/Neumann images.

``K(x,t;xi,tau) = exp(-(x-xi)^2 / (4D(t-tau))) / (2 sqrt(pi D (t-tau)))`` for
``t > tau`` and 0 otherwise.  The Green function ``G = K(x) - K(-x)`` vanishes
at ``x = 0``; the Neumann function ``N = K(x) + K(-x)`` has zero normal
derivative there.

The small ``_*`` helpers take the time lag ``r = t - tau > 0`` directly and
are used elementwise by the numpy backend; the numba loops in ``_hot_numba``
inline the same formulas.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidInputError, UnsupportedOperationError

# exp() arguments below this are flushed to exactly zero
UNDERFLOW = -700.0

KINDS = ("green", "neumann")
DERIVS = ("none", "d_x", "d_xi", "d_tau", "d_xx")


def _gauss(d, r, D):
    a = 4.0 * D * r
    arg = -d * d / a
    return np.exp(np.maximum(arg, -745.0)) * (arg >= UNDERFLOW) / np.sqrt(np.pi * a)


def _k_pair(x, xi, r, D):
    return _gauss(x - xi, r, D), _gauss(x + xi, r, D)


def _n_val(x, xi, r, D):
    k, ki = _k_pair(x, xi, r, D)
    return k + ki


def _g_val(x, xi, r, D):
    k, ki = _k_pair(x, xi, r, D)
    return k - ki


def _n_dx(x, xi, r, D):
    a = 4.0 * D * r
    k, ki = _k_pair(x, xi, r, D)
    return -(2.0 * (x - xi) / a) * k - (2.0 * (x + xi) / a) * ki


def _g_dx(x, xi, r, D):
    a = 4.0 * D * r
    k, ki = _k_pair(x, xi, r, D)
    return -(2.0 * (x - xi) / a) * k + (2.0 * (x + xi) / a) * ki


def _n_dxi(x, xi, r, D):
    # N_xi = -G_x
    return -_g_dx(x, xi, r, D)


def _g_dxi(x, xi, r, D):
    return -_n_dx(x, xi, r, D)


def _second(x, xi, r, D, sign):
    a = 4.0 * D * r
    k, ki = _k_pair(x, xi, r, D)
    dm = x - xi
    dp = x + xi
    return (4.0 * dm * dm / (a * a) - 2.0 / a) * k + sign * (4.0 * dp * dp / (a * a) - 2.0 / a) * ki


def _g_dxx(x, xi, r, D):
    return _second(x, xi, r, D, -1.0)


def _n_dxx(x, xi, r, D):
    return _second(x, xi, r, D, 1.0)


def _g_dtau(x, xi, r, D):
    # both images solve the backward heat equation in (xi, tau)
    return -D * _g_dxx(x, xi, r, D)


def _n_dtau(x, xi, r, D):
    return -D * _n_dxx(x, xi, r, D)


_TABLE = {
    ("green", "none"): _g_val,
    ("green", "d_x"): _g_dx,
    ("green", "d_xi"): _g_dxi,
    ("green", "d_tau"): _g_dtau,
    ("green", "d_xx"): _g_dxx,
    ("neumann", "none"): _n_val,
    ("neumann", "d_x"): _n_dx,
    ("neumann", "d_xi"): _n_dxi,
    ("neumann", "d_tau"): _n_dtau,
    ("neumann", "d_xx"): _n_dxx,
}


@dataclass(frozen=True)
class KernelQuery:
    """Evaluation point ``(x, t)``, source point ``(xi, tau)`` and diffusivity ``D``."""

    x: float
    t: float
    xi: float
    tau: float
    D: float = 1.0

    def __post_init__(self):
        for name in ("x", "t", "xi", "tau", "D"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"kernel query field {name} is not finite")
        if self.D <= 0:
            raise InvalidInputError(f"diffusivity must be positive, got D={self.D}")


def _check_arrays(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("kernel arguments must be finite")


def heat_kernel(x, t, xi, tau, D=1.0):
    """Vectorised ``K(x,t;xi,tau)``; exactly 0 where ``t <= tau``."""
    x, t, xi, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, t, xi, tau)))
    _check_arrays(x, t, xi, tau, D)
    if D <= 0:
        raise InvalidInputError(f"diffusivity must be positive, got D={D}")
    r = t - tau
    live = r > 0
    out = np.zeros(r.shape)
    out[live] = _gauss(x[live] - xi[live], r[live], D)
    return out[()] if out.ndim == 0 else out


def image_kernel(kind, deriv, x, t, xi, tau, D=1.0):
    """Vectorised Green/Neumann kernel or one of its analytic partial derivatives.

    ``deriv`` selects the derivative with respect to the evaluation point
    (``d_x``, ``d_xx``), the source point (``d_xi``) or the source time
    (``d_tau``).
    """
    key = (str(kind).lower(), str(deriv).lower())
    fn = _TABLE.get(key)
    if fn is None:
        raise UnsupportedOperationError(f"unsupported kernel selector kind={kind!r} deriv={deriv!r}")
    x, t, xi, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, t, xi, tau)))
    _check_arrays(x, t, xi, tau, D)
    if D <= 0:
        raise InvalidInputError(f"diffusivity must be positive, got D={D}")
    r = t - tau
    live = r > 0
    out = np.zeros(r.shape)
    out[live] = fn(x[live], xi[live], r[live], D)
    return out[()] if out.ndim == 0 else out


def eval_K(q: KernelQuery) -> float:
    """Fundamental solution of ``w_t = D w_xx`` at a single query."""
    return float(heat_kernel(q.x, q.t, q.xi, q.tau, q.D))


def eval_image_kernel(kind: str, deriv: str, q: KernelQuery) -> float:
    return float(image_kernel(kind, deriv, q.x, q.t, q.xi, q.tau, q.D))
