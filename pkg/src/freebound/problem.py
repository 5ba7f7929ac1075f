"""Physical problem data and its image in the heat-equation frame.

The physical problem is

    u_t = u^2 (D u_xx - u_x),   0 < x < s(t)
    D u_x(0, t) = g(t),  u(s(t), t) = beta,  D u_x(s, t) - u(s, t) = -s'(t)
    u(x, 0) = u0(x) >= beta,  s(0) = b.

The stretch map ``i(x) = C1 + int_0^x deta / u0(eta)`` carries ``[0, b]`` onto
``[C1, C2]``.  On that interval the heat-frame initial data are
``V0(y) = u0(i^-1(y)) - beta`` and the Hopf-Cole trace
``F(y) = V0(y) exp((1/D) int_y^C2 V0)``.
"""

from dataclasses import dataclass, field, replace
import math
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import (
    ConstraintViolationError,
    InvalidInputError,
    InvalidProfileError,
)

DEFAULT_SAMPLES = 401
# window [0, NORM_WINDOW] over which ||g|| is taken for the constants ledger
NORM_WINDOW = 1.0


def read_table(path):
    """Read a two-column numeric text table (abscissa, value).

    Blank lines and ``#`` comments are skipped; abscissae must be strictly
    increasing.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise InvalidInputError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need at least two rows")
    data = np.array(rows)
    _check_table(data[:, 0], data[:, 1], str(path))
    return data[:, 0].copy(), data[:, 1].copy()


def _check_table(x, v, what):
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise InvalidInputError(f"{what}: table contains non-finite values")
    if np.any(np.diff(x) <= 0):
        raise InvalidInputError(f"{what}: abscissae must be strictly increasing")


@dataclass(frozen=True)
class FluxSpec:
    """Boundary flux ``g(t)`` prescribed through ``D u_x(0, t) = g(t)``.

    ``form`` is one of ``constant`` (params ``(c,)``), ``linear`` (``(a, k)``:
    ``a + k t``), ``exponential`` (``(a, k)``: ``a exp(k t)``) or
    ``tabulated`` (``table = (t, g)``, piecewise linear).  ``t0`` shifts the
    time origin, which is how restarted segments see the same flux.
    """

    form: str = "constant"
    params: tuple = (0.0,)
    table: tuple = None
    t0: float = 0.0

    def __post_init__(self):
        if self.form not in ("constant", "linear", "exponential", "tabulated"):
            raise InvalidInputError(f"unknown flux form {self.form!r}")
        if self.form == "tabulated":
            if self.table is None:
                raise InvalidInputError("tabulated flux needs a table")
            t, g = (np.asarray(a, dtype=float) for a in self.table)
            _check_table(t, g, "flux table")
            if t[0] > 0:
                raise InvalidInputError("flux table must start at t <= 0")
            object.__setattr__(self, "table", (t, g))
        else:
            need = 1 if self.form == "constant" else 2
            if len(self.params) != need:
                raise InvalidInputError(f"{self.form} flux takes {need} parameter(s)")
            if not all(math.isfinite(p) for p in self.params):
                raise InvalidInputError("flux parameters must be finite")

    @classmethod
    def constant(cls, c=0.0):
        return cls("constant", (float(c),))

    @classmethod
    def linear(cls, a, k):
        return cls("linear", (float(a), float(k)))

    @classmethod
    def exponential(cls, a, k):
        return cls("exponential", (float(a), float(k)))

    @classmethod
    def tabulated(cls, t, g):
        return cls("tabulated", (), (np.asarray(t, float), np.asarray(g, float)))

    @classmethod
    def from_file(cls, path):
        return cls.tabulated(*read_table(path))

    @property
    def is_c1(self):
        """Piecewise-linear tables are only C0."""
        return self.form != "tabulated"

    def shifted(self, dt):
        return replace(self, t0=self.t0 + dt)

    def _abs_time(self, t):
        ta = np.asarray(t, dtype=float) + self.t0
        if self.form == "tabulated":
            tt = self.table[0]
            if np.any(ta > tt[-1] + 1e-12) or np.any(ta < tt[0] - 1e-12):
                raise InvalidInputError(
                    f"flux table covers [{tt[0]}, {tt[-1]}], asked for t in "
                    f"[{np.min(ta)}, {np.max(ta)}]"
                )
        return ta

    def __call__(self, t):
        ta = self._abs_time(t)
        if self.form == "constant":
            out = np.full(ta.shape, self.params[0])
        elif self.form == "linear":
            out = self.params[0] + self.params[1] * ta
        elif self.form == "exponential":
            out = self.params[0] * np.exp(self.params[1] * ta)
        else:
            out = np.interp(ta, *self.table)
        return out[()] if out.ndim == 0 else out

    def _primitive(self, ta):
        # antiderivative in absolute time, vanishing at absolute time 0
        if self.form == "constant":
            return self.params[0] * ta
        if self.form == "linear":
            a, k = self.params
            return a * ta + 0.5 * k * ta * ta
        if self.form == "exponential":
            a, k = self.params
            if k == 0.0:
                return a * ta
            return a * np.expm1(k * ta) / k
        tt, gg = self.table
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (gg[1:] + gg[:-1]) * np.diff(tt))))
        idx = np.clip(np.searchsorted(tt, ta, side="right") - 1, 0, len(tt) - 2)
        dt = ta - tt[idx]
        slope = (gg[idx + 1] - gg[idx]) / (tt[idx + 1] - tt[idx])
        val = cum[idx] + gg[idx] * dt + 0.5 * slope * dt * dt
        zero_idx = np.clip(np.searchsorted(tt, 0.0, side="right") - 1, 0, len(tt) - 2)
        dz = 0.0 - tt[zero_idx]
        s0 = (gg[zero_idx + 1] - gg[zero_idx]) / (tt[zero_idx + 1] - tt[zero_idx])
        return val - (cum[zero_idx] + gg[zero_idx] * dz + 0.5 * s0 * dz * dz)

    def integral(self, t):
        """``int_0^t g`` in the (possibly shifted) local time."""
        ta = self._abs_time(t)
        out = self._primitive(ta) - self._primitive(np.asarray(self.t0, dtype=float))
        return out[()] if np.ndim(out) == 0 else out

    def sup_norm(self, T=NORM_WINDOW, samples=2001):
        if self.form == "tabulated":
            tt, gg = self.table
            hi = min(T + self.t0, tt[-1])
            inside = (tt >= self.t0) & (tt <= hi)
            ends = np.interp([self.t0, hi], tt, gg)
            return float(np.max(np.abs(np.concatenate((gg[inside], ends)))))
        ts = np.linspace(0.0, T, samples)
        return float(np.max(np.abs(self(ts))))


@dataclass(frozen=True, eq=False)
class InitialProfile:
    """Initial concentration ``u0`` on ``[0, b]``, stored as a table.

    Values between samples come from a not-a-knot cubic spline (linear for
    fewer than four samples).  ``slope0`` optionally carries the exact
    ``u0'(0)`` for the compatibility check; otherwise the spline slope is used.
    """

    x: np.ndarray
    u: np.ndarray
    slope0: float = None
    label: str = "table"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if x.shape != u.shape or x.ndim != 1 or x.size < 3:
            raise InvalidInputError("profile table needs matching 1-D arrays with >= 3 samples")
        _check_table(x, u, "profile table")
        if abs(x[0]) > 1e-14:
            raise InvalidInputError("profile table must start at x = 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "_spline", CubicSpline(x, u) if x.size >= 4 else None)

    @classmethod
    def from_callable(cls, f, b, n=DEFAULT_SAMPLES, slope0=None, label="callable"):
        x = np.linspace(0.0, b, n)
        return cls(x, np.asarray(f(x), dtype=float) * np.ones_like(x), slope0, label)

    @classmethod
    def constant(cls, beta, b, n=DEFAULT_SAMPLES):
        return cls.from_callable(lambda x: np.full_like(x, beta), b, n, 0.0, "constant")

    @classmethod
    def compatible_quadratic(cls, beta, b, g0, D, A=0.5, n=DEFAULT_SAMPLES):
        """``beta + A (b - x) + (g0/D + A) x (1 - x/b)``.

        Satisfies ``u0(b) = beta``, ``D u0'(0) = g0`` and ``u0 >= beta`` when
        ``A, g0 >= 0``.
        """
        c = g0 / D + A
        f = lambda x: beta + A * (b - x) + c * x * (1.0 - x / b)  # noqa: E731
        return cls.from_callable(f, b, n, g0 / D, f"quadratic(A={A})")

    @classmethod
    def from_file(cls, path):
        x, u = read_table(path)
        return cls(x, u, None, str(path))

    @property
    def b(self):
        return float(self.x[-1])

    def __call__(self, x):
        if self._spline is None:
            return np.interp(x, self.x, self.u)
        return self._spline(np.clip(x, 0.0, self.b))

    def derivative(self, x=None):
        """``u0'`` at ``x`` (default: the table abscissae)."""
        x = self.x if x is None else np.clip(x, 0.0, self.b)
        if self._spline is None:
            return np.interp(x, self.x, np.gradient(self.u, self.x, edge_order=1))
        return self._spline(x, 1)

    def slope_at_zero(self):
        if self.slope0 is not None:
            return float(self.slope0)
        return float(self.derivative()[0])


@dataclass(frozen=True)
class PhysicalProblem:
    D: float
    beta: float
    b: float
    g: FluxSpec
    u0: InitialProfile

    def __post_init__(self):
        for name in ("D", "beta", "b"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        if abs(self.u0.b - self.b) > 1e-12 * max(1.0, abs(self.b)):
            raise InvalidInputError(f"profile ends at x={self.u0.b}, but b={self.b}")


@dataclass
class Check:
    name: str
    passed: bool
    defect: float
    tol: float = 0.0
    note: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    g_norm: float = float("nan")
    g_is_c1: bool = True

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self):
        lines = []
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"{mark} {c.name:<28s} defect={c.defect:.3e} {c.note}".rstrip())
        return "\n".join(lines)


def validate_problem(p: PhysicalProblem) -> ValidationReport:
    """Check the standing hypotheses on the data; never raises."""
    rep = ValidationReport()
    add = rep.checks.append
    add(Check("0<D<2", 0.0 < p.D < 2.0, max(0.0 - p.D, p.D - 2.0, 0.0) if not 0 < p.D < 2 else 0.0))
    add(Check("beta>0", p.beta > 0, max(-p.beta, 0.0)))
    add(Check("b>0", p.b > 0, max(-p.b, 0.0)))
    below = float(np.max(p.beta - p.u0.u))
    add(Check("u0>=beta", below <= 1e-12, max(below, 0.0), 1e-12))
    end = abs(float(p.u0.u[-1]) - p.beta)
    add(Check("u0(b)=beta", end <= 1e-10, end, 1e-10))
    try:
        g0 = float(p.g(0.0))
        compat = abs(p.D * p.u0.slope_at_zero() - g0)
    except InvalidInputError as exc:
        add(Check("D*u0'(0)=g(0)", False, float("inf"), 1e-8, str(exc)))
    else:
        add(Check("D*u0'(0)=g(0)", compat <= 1e-8, compat, 1e-8))
    try:
        rep.g_norm = p.g.sup_norm()
    except InvalidInputError as exc:
        add(Check("g defined on [0,1]", False, float("inf"), note=str(exc)))
    rep.g_is_c1 = p.g.is_c1
    add(Check("g in C1", True, 0.0, note="" if p.g.is_c1 else "piecewise-linear table: C0 only"))
    return rep


@dataclass(frozen=True, eq=False)
class StretchMap:
    """``i(x) = C1 + int_0^x 1/u0`` on ``[0, b]`` and its inverse on ``[C1, C2]``."""

    C1: float
    x: np.ndarray
    i_table: np.ndarray
    _spline: CubicHermiteSpline

    @property
    def C2(self):
        return float(self.i_table[-1])

    @property
    def b(self):
        return float(self.x[-1])

    def __call__(self, x):
        return self._spline(np.clip(x, 0.0, self.b))

    def inverse(self, y, tol=1e-13):
        """Bisection on the monotone interpolant; tolerance in ``x``."""
        y = np.asarray(y, dtype=float)
        lo = np.zeros(y.shape)
        hi = np.full(y.shape, self.b)
        iters = int(np.ceil(np.log2(max(self.b, tol) / tol))) + 1
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            right = self._spline(mid) < y
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
        out = 0.5 * (lo + hi)
        return out[()] if out.ndim == 0 else out


def build_stretch_map(p: PhysicalProblem, C1: float) -> StretchMap:
    u = p.u0.u
    if np.any(u <= 0) or not np.all(np.isfinite(u)):
        raise InvalidProfileError("u0 must be strictly positive for the stretch map to be monotone")
    x = p.u0.x
    recip = 1.0 / u
    cum = cumulative_simpson(recip, x=x, initial=0.0)
    i_table = C1 + cum
    if np.any(np.diff(i_table) <= 0):
        raise InvalidProfileError("stretch map is not strictly increasing")
    spline = CubicHermiteSpline(x, i_table, recip)
    return StretchMap(float(C1), x, i_table, spline)


@dataclass(frozen=True, eq=False)
class TransformedProblem:
    """Heat-frame data on the uniform grid ``y`` over ``[C1, C2]``.

    ``t0`` is the absolute start time of the segment (zero for a fresh
    problem).  ``C(t)`` restarts at 1 in every segment, which only rescales
    ``w``.
    """

    C1: float
    C2: float
    y: np.ndarray
    V0: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    D: float
    beta: float
    u0_norm: float
    du0_norm: float
    g_norm: float
    consistency_defect: float = 0.0
    t0: float = 0.0
    stretch: StretchMap = None

    @property
    def F_norm(self):
        return float(np.max(np.abs(self.F)))

    def F_at(self, y):
        """Cubic Hermite interpolant of ``F`` (using ``dF``) at ``y``."""
        return CubicHermiteSpline(self.y, self.F, self.dF)(y)


def hopf_cole_trace(y, V0, D):
    """``F(y) = V0(y) exp((1/D) int_y^{y_end} V0)`` on a sorted grid."""
    tail = _tail_integral(V0, y)
    return V0 * np.exp(tail / D)


def _tail_integral(f, y):
    # int_y^{y[-1]} f on the grid, composite Simpson
    head = cumulative_simpson(f, x=y, initial=0.0)
    return head[-1] - head


def centered_slopes(f, y):
    return np.gradient(f, y, edge_order=2)


def build_transformed_problem(p: PhysicalProblem, C1="auto", n=DEFAULT_SAMPLES) -> TransformedProblem:
    """Map the physical data to ``(C1, C2, V0, F)``.

    With ``C1="auto"`` the constant is ``(1/4) int_0^b 1/u0``, which puts it in
    the middle of the admissible range ``0 < 3 C1 < C2``.
    """
    length = build_stretch_map(p, 0.0).C2
    if isinstance(C1, str):
        if C1 != "auto":
            raise InvalidInputError(f"C1 must be 'auto' or a number, got {C1!r}")
        C1 = 0.25 * length
    C1 = float(C1)
    C2 = C1 + length
    if not (0.0 < 3.0 * C1 < C2):
        raise ConstraintViolationError(f"need 0 < 3*C1 < C2, got C1={C1}, C2={C2}")
    smap = build_stretch_map(p, C1)
    y = np.linspace(C1, C2, n)
    x_of_y = smap.inverse(y)
    V0 = p.u0(x_of_y) - p.beta
    V0[-1] = float(p.u0.u[-1]) - p.beta
    F = hopf_cole_trace(y, V0, p.D)
    # F' = exp(tail / D) (V0' - V0^2 / D) with V0' = u0'(x) u0(x)
    du0 = p.u0.derivative(x_of_y)
    du0[0] = p.u0.slope_at_zero()
    dF = np.exp(_tail_integral(V0, y) / p.D) * (du0 * (V0 + p.beta) - V0 * V0 / p.D)
    b_back = simpson(V0 + p.beta, x=y)
    return TransformedProblem(
        C1=C1,
        C2=float(C2),
        y=y,
        V0=V0,
        F=F,
        dF=dF,
        D=p.D,
        beta=p.beta,
        u0_norm=float(np.max(np.abs(p.u0.u))),
        du0_norm=float(np.max(np.abs(p.u0.derivative()))),
        g_norm=p.g.sup_norm(),
        consistency_defect=abs(p.b - b_back),
        stretch=smap,
    )
