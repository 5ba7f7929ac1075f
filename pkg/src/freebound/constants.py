"""A-priori constants of the contraction analysis and the admissible horizon.

Every ``E*``/``F*`` function transcribes one closed-form bound.  The
prefactor ``2/(2-D)`` appears here exactly as in those bounds, independent of
the jump factor the solver itself uses (see :mod:`freebound.volterra`).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateGeometryError

SQPI = math.sqrt(math.pi)
E = math.e


def printed_factor(D):
    return 2.0 / (2.0 - D)


def E0(u0n, beta, C1, C2, D):
    return ((u0n + beta) ** 2 * (C2 - C1) / D) * (
        math.sqrt(8.0 / (E * (C2 - 2 * C1) ** 2)) + math.sqrt(8.0 / (E * (C2 + 2 * C1) ** 2))
    )


def _exp_factor(u0n, beta, C1, C2, D):
    return math.exp((u0n + beta) * (C2 - C1) / D)


def E1(u0n, du0n, beta, C1, C2, D):
    return _exp_factor(u0n, beta, C1, C2, D) * (du0n + (u0n + beta) ** 2 / D)


def E2(M, D, beta, C2):
    return (D * M / (4 * SQPI)) * (
        2 * (1 + beta) * (1 + M / beta**2) + 3 * C2 * (2.0 / (3 * E * C2**2)) ** 1.5
    )


def E31(C1, C2):
    return (9 * (C2 + C1) ** 2 / (32 * SQPI)) * (40.0 / (E * (C2 - 3 * C1) ** 2)) ** 2.5 + (
        1 / (4 * SQPI)
    ) * (24.0 / (E * (C2 - 3 * C1) ** 2)) ** 1.5


def E32(C1, C2):
    return (9 * (C2 + C1) ** 2 / (32 * SQPI)) * (40.0 / (E * (C2 + C1) ** 2)) ** 2.5 + (
        1 / (4 * SQPI)
    ) * (24.0 / (E * (C2 + C1) ** 2)) ** 1.5


def E3(M, C1, C2):
    return M * (E31(C1, C2) + E32(C1, C2))


def _pair24(C1, C2):
    return (24.0 / (E * (C2 - 3 * C1) ** 2)) ** 1.5 + (24.0 / (E * (C2 + C1) ** 2)) ** 1.5


def E4(M, beta, C1, C2):
    return (3 * M * beta * (C1 + C2) / (8 * SQPI)) * _pair24(C1, C2)


def E5(R, beta, gn, C1, C2):
    return (3 * R * gn * beta * (C1 + C2) / (8 * SQPI)) * _pair24(C1, C2)


def E6(u0n, beta, C1, C2, D):
    return _exp_factor(u0n, beta, C1, C2, D) * (u0n + beta)


def E7(D, M):
    return 2 * D * M / SQPI


def E8(M, D, H, beta, gn, C1):
    return (D * M / (4 * SQPI)) * (
        2 * (beta + D * gn + M / H) + 3 * C1 * (2.0 / (3 * E * C1**2)) ** 1.5
    )


def E9(beta, M):
    return 2 * beta * M / SQPI


def E10(beta, R, gn):
    return 2 * beta * R * gn / SQPI


def F0(D, beta, C1, C2):
    return (3 * D * (C2 + C1) * (beta + 1) / (8 * SQPI * beta**2)) * (
        (24.0 / (E * (C2 - 2 * C1) ** 2)) ** 1.5 + (24.0 / (E * (C2 + 2 * C1) ** 2)) ** 1.5
    )


def F1(u0n, du0n, beta, C1, C2, D):
    return (2 / SQPI) * E1(u0n, du0n, beta, C1, C2, D)


def F2(M, D, beta, C2):
    return (
        (D / (4 * SQPI)) * (2 * (1 + beta) * (1 + M / beta**2) + 3 * C2 * (2.0 / (3 * E * C2**2)) ** 1.5)
        + (D**-0.5 / SQPI)
        * (D * (beta + 1) / beta**2 + 2 * (beta + 1) ** 2 / beta**2 * (1 + D * M / beta**2) ** 2)
        + (6.0 / (E * C2**2)) ** 1.5 * (18 * C2**2 + 1) / (4 * SQPI) * 2 * D * (beta + 1) / beta**2
    )


def F31(C1, C2):
    d3 = (C2 - 3 * C1) ** 3
    return (1 / (SQPI * E**1.5)) * (
        math.sqrt(6) * (3 * C2 - C1) ** 2 / (16 * d3)
        + 27 * math.sqrt(3) / 4
        + 12 * math.sqrt(6) / d3
        + 6 * math.sqrt(3) / (C2 + C1) ** 3
    )


def F32(C1, C2):
    d3 = (C2 - 3 * C1) ** 3
    return (12 * math.sqrt(6) / (SQPI * E**1.5)) * (
        1 / d3 + 9.0 / 8 + (3 * C2 - C1) ** 2 / (8 * d3) + 1 / (C2 + C1) ** 2
    )


def F3(M, beta, C1, C2):
    return M * beta * (F31(C1, C2) + F32(C1, C2))


def F4(beta, C1, C2, gn, R):
    return beta * R * gn * (F31(C1, C2) + F32(C1, C2))


def F51(C1, C2):
    return (math.sqrt(6) / math.sqrt(math.pi * E)) * (1 / (C2 - 3 * C1) ** 2 + 1 / (C2 + C1) ** 2)


def F5(M, C1, C2):
    return M * (F31(C1, C2) + F32(C1, C2)) + F51(C1, C2)


def F6(u0n, beta, C1, C2, D):
    return (2 / (D * SQPI)) * _exp_factor(u0n, beta, C1, C2, D) * (u0n + beta)


def F7(beta, M, D, C1, C2):
    return beta * M * (6**1.5 * D / (SQPI * E**1.5)) * (
        (3 * C2 - C1) / (C2 - 3 * C1) ** 3 + 3 / (C2 + C1) ** 2
    )


def F8(M, D, C1):
    return (math.sqrt(D) / (4 * SQPI)) * (
        6 * M + (3 / C1**2) * (2 / (3 * E)) ** 1.5 + (6 * M / C1**2) * (6 / E) ** 1.5
    )


def F9(M, beta, H, D, gn, C1):
    return (
        (D / (4 * SQPI)) * (2 * (1 + beta) * (1 + M / beta**2) + 3 * C1 * (2.0 / (3 * E * C1**2)) ** 1.5)
        + (D**-0.5 / SQPI) * (1 / H + 2 / H * (beta + D * gn + M / H) ** 2)
        + (6.0 / (E * C1**2)) ** 1.5 * (18 * C1**2 + 1) / (4 * SQPI) / H
    )


def F10(beta, gn, R, M, H, D, C1):
    return beta * R * gn * (
        (beta + D * gn + M / H) ** 2 / math.sqrt(math.pi * D) + (6 / E) ** 1.5 / (C1**2 * SQPI)
    )


@dataclass
class Inequality:
    name: str
    lhs: float
    rhs: float

    @property
    def holds(self):
        return self.lhs <= self.rhs


@dataclass
class ConstantsLedger:
    """Bounds ``E0..E10``, ``F0..F10``, the boxes ``M, H, R`` and the horizon ``sigma_star``.

    ``bounds`` maps each horizon inequality to the largest ``sigma`` it allows.
    """

    E: dict
    F: dict
    M: float
    H: float
    R: float
    sigma_star: float
    bounds: dict
    D: float
    beta: float
    C1: float
    C2: float
    g_norm: float
    extras: dict = field(default_factory=dict)

    @property
    def binding(self):
        """Name of the inequality that fixes ``sigma_star``."""
        return min(self.bounds, key=self.bounds.get)

    def inequalities(self, sigma):
        return horizon_inequalities(self, sigma)

    def satisfied(self, sigma):
        return all(q.holds for q in self.inequalities(sigma))

    def rows(self):
        """``(name, value)`` pairs in a fixed order, for tabular output."""
        out = [(f"E{k}", v) for k, v in self.E.items()]
        out += [(f"F{k}", v) for k, v in self.F.items()]
        out += [("M", self.M), ("H", self.H), ("R", self.R)]
        out += [(f"bound:{k}", v) for k, v in self.bounds.items()]
        out += [("sigma_star", self.sigma_star)]
        return out


def _e_sum(led):
    return sum(led.E[k] for k in ("0", "2", "3", "4", "5", "7", "8", "9", "10"))


def _f_sum(led):
    return sum(led.F[str(i)] for i in range(11))


def horizon_inequalities(led, sigma):
    """The seven horizon conditions at ``sigma`` as ``lhs <= rhs`` records."""
    D, beta, M, H = led.D, led.beta, led.M, led.H
    pf = printed_factor(D)
    drift0 = beta + D * led.g_norm + M / H
    lip1 = (1 + beta) * (1 + D * M / beta**2)
    rs = math.sqrt(sigma)
    return [
        Inequality("sigma<=1/M", sigma, 1.0 / M),
        Inequality("y1-box", 2 * lip1 * sigma, led.C2),
        Inequality("y0-box", 2 * drift0 * sigma, led.C1),
        Inequality("w0-drift", M / (H * D) * drift0 * sigma, 1.0),
        Inequality("log-arg", 2 * M * (beta + 1) / beta**2 * (1 + D * M / beta**2) * sigma, 1.0),
        Inequality("self-map", pf * _e_sum(led) * rs, 1.0),
        Inequality("contraction", pf * _f_sum(led) * rs, 1.0),
    ]


def _closed_form_bounds(led):
    D, beta, M, H = led.D, led.beta, led.M, led.H
    pf = printed_factor(D)
    drift0 = beta + D * led.g_norm + M / H
    lip1 = (1 + beta) * (1 + D * M / beta**2)
    return {
        "sigma<=1/M": 1.0 / M,
        "y1-box": led.C2 / (2 * lip1),
        "y0-box": led.C1 / (2 * drift0),
        "w0-drift": H * D / (M * drift0),
        "log-arg": beta**2 / (2 * M * (beta + 1) * (1 + D * M / beta**2)),
        "self-map": (1.0 / (pf * _e_sum(led))) ** 2,
        "contraction": (1.0 / (pf * _f_sum(led))) ** 2,
    }


def compute_constants(tp, p=None) -> ConstantsLedger:
    """Evaluate the ledger for a transformed problem.

    ``p`` is accepted for symmetry with the rest of the pipeline; all inputs
    (norms of ``u0`` and ``g``, ``D``, ``beta``, ``C1``, ``C2``) are carried by
    ``tp``.
    """
    D, beta, C1, C2 = tp.D, tp.beta, tp.C1, tp.C2
    u0n, du0n, gn = tp.u0_norm, tp.du0_norm, tp.g_norm
    if not (0 < D < 2):
        raise DegenerateGeometryError(f"the ledger needs 0 < D < 2, got D={D}")
    if C2 - 3 * C1 <= 0 or C1 <= 0:
        raise DegenerateGeometryError(f"the ledger needs 0 < 3*C1 < C2, got C1={C1}, C2={C2}")
    pf = printed_factor(D)
    H = 1.0
    try:
        e1 = E1(u0n, du0n, beta, C1, C2, D)
        e6 = E6(u0n, beta, C1, C2, D)
        M = 1.0 + pf * (e1 + e6)
        R = 2.0 + M * (1.5 * C2 - 0.5 * C1)
        Ev = {
            "0": E0(u0n, beta, C1, C2, D),
            "1": e1,
            "2": E2(M, D, beta, C2),
            "3": E3(M, C1, C2),
            "4": E4(M, beta, C1, C2),
            "5": E5(R, beta, gn, C1, C2),
            "6": e6,
            "7": E7(D, M),
            "8": E8(M, D, H, beta, gn, C1),
            "9": E9(beta, M),
            "10": E10(beta, R, gn),
        }
        Fv = {
            "0": F0(D, beta, C1, C2),
            "1": F1(u0n, du0n, beta, C1, C2, D),
            "2": F2(M, D, beta, C2),
            "3": F3(M, beta, C1, C2),
            "4": F4(beta, C1, C2, gn, R),
            "5": F5(M, C1, C2),
            "6": F6(u0n, beta, C1, C2, D),
            "7": F7(beta, M, D, C1, C2),
            "8": F8(M, D, C1),
            "9": F9(M, beta, H, D, gn, C1),
            "10": F10(beta, gn, R, M, H, D, C1),
        }
    except (OverflowError, ZeroDivisionError) as exc:
        raise DegenerateGeometryError(f"constant evaluation failed: {exc}") from None
    extras = {"E31": E31(C1, C2), "E32": E32(C1, C2), "F31": F31(C1, C2), "F32": F32(C1, C2), "F51": F51(C1, C2)}
    vals = list(Ev.values()) + list(Fv.values()) + [M, R] + list(extras.values())
    if not all(math.isfinite(v) for v in vals):
        raise DegenerateGeometryError("non-finite constant in the ledger")
    led = ConstantsLedger(Ev, Fv, M, H, R, 0.0, {}, D, beta, C1, C2, gn, extras)
    led.bounds = _closed_form_bounds(led)
    sigma = min(led.bounds.values())
    # the closed form can sit one ulp above an inequality; step down until all hold
    while not led.satisfied(sigma):
        sigma = float(np.nextafter(sigma, 0.0))
    led.sigma_star = sigma
    return led
