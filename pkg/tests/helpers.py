"""Shared problem data and cached solves for the test suite."""

from functools import lru_cache
import warnings

import numpy as np

from freebound import (
    FluxSpec,
    HorizonWarning,
    InitialProfile,
    PhysicalProblem,
    TimeGrid,
    build_transformed_problem,
    compute_constants,
    outer_solve,
)

SIGMA = 0.05  # practical horizon used where the certified one is too short to show anything
G0 = 0.05


def trivial_problem(D=1.0, beta=1.0, b=1.0):
    return PhysicalProblem(D, beta, b, FluxSpec.constant(0.0), InitialProfile.constant(beta, b))


def generic_problem(D=1.0, beta=1.0, b=1.0, A=0.5, g0=G0, slope=G0):
    u0 = InitialProfile.compatible_quadratic(beta, b, g0, D, A)
    return PhysicalProblem(D, beta, b, FluxSpec.linear(g0, slope), u0)


# three smooth configurations with different shapes and coefficients
CONFIGS = {
    "quadratic": dict(D=1.0, beta=1.0, b=1.0, A=0.5, g0=0.05, slope=0.05),
    "steep": dict(D=0.6, beta=1.5, b=0.8, A=1.0, g0=0.1, slope=0.0),
    "slow": dict(D=1.4, beta=0.8, b=1.2, A=0.2, g0=0.02, slope=0.1),
}


@lru_cache(maxsize=None)
def transformed(kind="generic"):
    p = trivial_problem() if kind == "trivial" else generic_problem(**CONFIGS.get(kind, CONFIGS["quadratic"]))
    tp = build_transformed_problem(p)
    return p, tp, compute_constants(tp, p)


@lru_cache(maxsize=None)
def solved(kind="generic", N=256, sigma=SIGMA, Ny=65):
    """``(p, tp, state)``; ``sigma=None`` means the certified horizon."""
    p, tp, led = transformed(kind)
    s = led.sigma_star if sigma is None else sigma
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HorizonWarning)
        state = outer_solve(tp, p, TimeGrid(s, N), Ny=Ny)
    return p, tp, state


def sup(a):
    return float(np.max(np.abs(a)))
