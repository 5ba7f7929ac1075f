import numpy as np
import pytest

from freebound import (
    ConstraintViolationError,
    FluxSpec,
    InitialProfile,
    InvalidInputError,
    InvalidProfileError,
    PhysicalProblem,
    build_stretch_map,
    build_transformed_problem,
    validate_problem,
)
from freebound.problem import read_table

from helpers import generic_problem, trivial_problem


def test_trivial_data_pass():
    rep = validate_problem(trivial_problem())
    assert rep.passed
    assert rep.g_norm == 0.0


def test_diffusivity_out_of_range():
    rep = validate_problem(trivial_problem(D=3.0))
    assert not rep.passed
    assert [c.name for c in rep.failures()] == ["0<D<2"]


def test_incompatible_flux():
    p = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(0.5), InitialProfile.constant(1.0, 1.0))
    rep = validate_problem(p)
    assert not rep["D*u0'(0)=g(0)"].passed
    assert rep["D*u0'(0)=g(0)"].defect == pytest.approx(0.5)


def test_profile_below_beta_and_wrong_end():
    u0 = InitialProfile.from_callable(lambda x: 1.0 - 0.1 * x * (1 - x), 1.0, slope0=0.0)
    rep = validate_problem(PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(-0.1), u0))
    assert not rep["u0>=beta"].passed
    u0 = InitialProfile.from_callable(lambda x: 1.5 + 0 * x, 1.0, slope0=0.0)
    rep = validate_problem(PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(0.0), u0))
    assert not rep["u0(b)=beta"].passed


def test_tabulated_flux_is_flagged():
    g = FluxSpec.tabulated([0, 0.5, 2], [0.05, 0.1, 0.0])
    u0 = InitialProfile.compatible_quadratic(1.0, 1.0, 0.05, 1.0)
    rep = validate_problem(PhysicalProblem(1.0, 1.0, 1.0, g, u0))
    assert rep.passed
    assert not rep.g_is_c1
    assert rep.g_norm == pytest.approx(0.1)


def test_flux_forms_and_integral():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(FluxSpec.linear(0.1, 0.2)(t), 0.1 + 0.2 * t)
    np.testing.assert_allclose(FluxSpec.exponential(0.1, -1)(t), 0.1 * np.exp(-t))
    np.testing.assert_allclose(FluxSpec.linear(0.1, 0.2).integral(t), 0.1 * t + 0.1 * t**2, atol=1e-15)
    g = FluxSpec.tabulated([0, 1], [0, 2])
    assert g.integral(1.0) == pytest.approx(1.0)
    assert FluxSpec.linear(0, 1).shifted(0.5)(0.0) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        FluxSpec("cubic")
    with pytest.raises(InvalidInputError):
        FluxSpec("linear", (1.0,))


def test_read_table(tmp_path):
    path = tmp_path / "u0.txt"
    path.write_text("# x u\n0 2\n0.5 1.5\n1 1\n")
    x, u = read_table(path)
    np.testing.assert_allclose(x, [0, 0.5, 1])
    np.testing.assert_allclose(u, [2, 1.5, 1])
    (tmp_path / "bad.txt").write_text("0 1\n0 2\n1 3\n")
    with pytest.raises(InvalidInputError):
        InitialProfile.from_file(tmp_path / "bad.txt")


def test_stretch_map_constant_profile():
    p = trivial_problem(beta=2.0, b=1.5)
    sm = build_stretch_map(p, 0.3)
    x = np.linspace(0, 1.5, 7)
    np.testing.assert_allclose(sm(x), 0.3 + x / 2.0, atol=1e-13)
    assert sm.C2 == pytest.approx(0.3 + 1.5 / 2.0, abs=1e-13)


def test_stretch_map_log():
    u0 = InitialProfile.from_callable(lambda x: 1.0 + x, 1.0, n=401)
    p = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(1.0), u0)
    sm = build_stretch_map(p, 0.0)
    assert sm.C2 == pytest.approx(np.log(2.0), abs=1e-10)
    x = np.linspace(0, 1, 33)
    np.testing.assert_allclose(sm(x), np.log1p(x), atol=1e-10)


def test_stretch_map_round_trip():
    sm = build_stretch_map(generic_problem(), 0.2)
    x = np.random.default_rng(3).uniform(0, 1, 100)
    np.testing.assert_allclose(sm.inverse(sm(x)), x, atol=1e-10)


def test_nonpositive_profile_rejected():
    u0 = InitialProfile(np.linspace(0, 1, 5), np.array([1.0, 0.5, -0.1, 0.5, 1.0]))
    p = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(0.0), u0)
    with pytest.raises(InvalidProfileError):
        build_stretch_map(p, 0.1)


def test_transformed_trivial():
    tp = build_transformed_problem(trivial_problem(beta=2.0, b=1.0))
    assert np.all(tp.V0 == 0.0) and np.all(tp.F == 0.0)
    assert tp.C1 == pytest.approx(1.0 / 8.0)
    assert tp.C2 == pytest.approx(5 * tp.C1)


def test_transformed_generic_properties():
    p = generic_problem()
    tp = build_transformed_problem(p)
    assert tp.F[-1] == 0.0
    assert 0 < 3 * tp.C1 < tp.C2
    assert tp.consistency_defect <= 1e-6 * p.b
    inside = tp.V0 != 0
    assert np.all(np.sign(tp.F[inside]) == np.sign(tp.V0[inside]))
    # the Hermite interpolant of F reproduces the nodes and has the analytic slope
    mid = 0.5 * (tp.y[:-1] + tp.y[1:])
    fine = build_transformed_problem(p, n=4001)
    np.testing.assert_allclose(tp.F_at(mid), np.interp(mid, fine.y, fine.F), atol=1e-7)


def test_refinement_stability():
    f = lambda x: 1.0 + 0.4 * (1 - x) + 0.3 * np.sin(3 * x) * (1 - x)  # noqa: E731
    coarse = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(0.0), InitialProfile.from_callable(f, 1.0, 401))
    fine = PhysicalProblem(1.0, 1.0, 1.0, FluxSpec.constant(0.0), InitialProfile.from_callable(f, 1.0, 801))
    a = build_stretch_map(coarse, 0.0).C2
    b = build_stretch_map(fine, 0.0).C2
    assert abs(a - b) <= 1e-6 * b


def test_explicit_c1_constraint():
    with pytest.raises(ConstraintViolationError):
        build_transformed_problem(trivial_problem(), C1=0.6)
    tp = build_transformed_problem(trivial_problem(), C1=0.4)
    assert tp.C2 == pytest.approx(1.4)
