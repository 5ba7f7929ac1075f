import warnings

import numpy as np
import pytest

from freebound import (
    FluxSpec,
    HorizonWarning,
    InitialProfile,
    InsufficientDataError,
    InvalidInputError,
    PhysicalProblem,
    TimeGrid,
    build_transformed_problem,
    inner_solve,
    invert_solution,
    invert_state,
    outer_solve,
    residual_report,
)

from helpers import SIGMA, solved, sup, transformed

PROFILES = {
    "quadratic": lambda x: 1.0 + 0.5 * (1 - x) + 0.55 * x * (1 - x),
    "sine": lambda x: 1.0 + 0.3 * np.sin(np.pi * x) + 0.2 * (1 - x),
    "exponential": lambda x: 1.0 + 0.8 * (np.exp(1 - x) - 1) / (np.e - 1),
}


def test_trivial_solution_is_exact():
    p, tp, _ = transformed("trivial")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HorizonWarning)
        st = outer_solve(tp, p, TimeGrid(0.1, 32))
    sol = invert_solution(st, tp, p)
    for u in sol.u:
        assert sup(u - 1.0) <= 1e-8
    np.testing.assert_allclose(sol.s, 1.0 + sol.times, rtol=1e-12)
    rep = residual_report(sol, st, p, tp)
    assert max(rep.as_dict().values()) <= 1e-8


@pytest.mark.parametrize("name", list(PROFILES))
def test_round_trip_at_start(name):
    u0 = InitialProfile.from_callable(PROFILES[name], 1.0)
    p = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(float(u0.slope_at_zero())), u0)
    tp = build_transformed_problem(p)
    st = inner_solve(np.ones(9), tp, p, TimeGrid(1e-6, 8))
    x, u, s = invert_state(st, tp, p, 0.0)
    assert s == pytest.approx(1.0, rel=1e-6)
    assert np.all(np.diff(x) > 0)
    assert sup(u - PROFILES[name](x)) <= 1e-4


@pytest.fixture(scope="module")
def generic():
    p, tp, st = solved("quadratic", N=256)
    sol = invert_solution(st, tp, p)
    return p, tp, st, sol, residual_report(sol, st, p, tp)


def test_generic_structure(generic):
    p, tp, st, sol, rep = generic
    assert sol.s[0] == pytest.approx(p.b, rel=1e-6)
    assert rep.dirichlet <= 1e-6
    assert all(np.all(np.diff(x) > 0) for x in sol.x)
    assert np.all(np.diff(sol.s) > 0)
    assert rep.stefan <= 0.05 * p.beta
    assert rep.neumann <= 0.05 * max(tp.g_norm, p.beta)
    assert len(rep.per_time["pde"]) == len(sol.times)


def test_pde_residual_refinement():
    # away from the corner layer at t = 0 and the boundary bands of each slice
    reps = []
    for N, Ny in ((128, 65), (256, 129)):
        p, tp, st = solved("quadratic", N=N, Ny=Ny)
        sol = invert_solution(st, tp, p, Ny=Ny)
        reps.append(residual_report(sol, st, p, tp, margin=0.05, t_min=SIGMA / 4))
    assert reps[0].pde / reps[1].pde >= 1.8
    assert reps[1].neumann < reps[0].neumann


def test_report_errors(generic):
    p, tp, st, sol, _ = generic
    with pytest.raises(InvalidInputError):
        residual_report(sol, st, p, tp, margin=0.6)
    with pytest.raises(InsufficientDataError):
        residual_report(sol, st, p, tp, t_min=1.0)
    short = invert_solution(st, tp, p, stride=200)
    assert len(short) == 3
    with pytest.raises(InvalidInputError):
        residual_report(short, st, p, tp)  # uneven spacing
    with pytest.raises(InvalidInputError):
        invert_solution(st, tp, p, Ny=2)
