"""Rayleigh-quotient discretization and the variational cross-checks."""

import math

import numpy as np
import pytest

from plapeig import (BracketError, Coefficient, Eigenpair, NonconvergenceError,
                     Problem, check_nodal_measure, check_weyl, lambda2_equalize,
                     make_mesh, minimize_lambda1, pi_p, quotient_and_gradient,
                     rayleigh_quotient, sin_p, solve_eigenpair, solve_eigenvalue)


def constant_problem(p=2.0, a=1.0, rho=1.0):
    return Problem(1.0, p, Coefficient.constant(a), Coefficient.constant(rho))


def two_phase_problem(p=2.0, a_vals=(1.0, 4.0)):
    a = Coefficient.piecewise_constant([0.0, 0.5, 1.0], list(a_vals))
    return Problem(1.0, p, a, Coefficient.constant(1.0))


def first_mode(prob, mesh):
    pip = pi_p(prob.p)
    return np.array([sin_p(prob.p, pip * x / prob.length) for x in mesh.nodes])


# -- mesh and quotient ---------------------------------------------------


def test_mesh_includes_breakpoints():
    prob = two_phase_problem()
    mesh = make_mesh(prob, 33)
    assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 1.0
    assert np.all(np.diff(mesh.nodes) > 0.0)
    assert np.any(np.isclose(mesh.nodes, 0.5, atol=1e-15))
    # midpoint sampling keeps each element inside one phase
    assert set(np.round(mesh.a_mid, 12)) <= {1.0, 4.0}


def test_quotient_sin_interpolant_converges_quadratically():
    prob = constant_problem()
    errs = []
    for n in (50, 100, 200):
        mesh = make_mesh(prob, n)
        U = np.sin(math.pi * mesh.nodes)
        U[0] = U[-1] = 0.0
        errs.append(rayleigh_quotient(mesh, 2.0, U) - math.pi ** 2)
    assert all(e > 0.0 for e in errs)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_quotient_p3_interpolant_example():
    prob = constant_problem(p=3.0)
    mesh = make_mesh(prob, 200)
    val = rayleigh_quotient(mesh, 3.0, first_mode(prob, mesh))
    assert val == pytest.approx(pi_p(3.0) ** 3, rel=0.01)


def test_quotient_zero_homogeneity():
    prob = two_phase_problem(p=2.5)
    mesh = make_mesh(prob, 64)
    U = first_mode(prob, mesh)
    base = rayleigh_quotient(mesh, 2.5, U)
    for c in (-3.0, 0.1, 17.0):
        assert rayleigh_quotient(mesh, 2.5, c * U) == pytest.approx(base, rel=1e-12)


def test_quotient_rejects_degenerate_input():
    prob = constant_problem()
    mesh = make_mesh(prob, 32)
    with pytest.raises(ValueError):
        rayleigh_quotient(mesh, 2.0, np.zeros(len(mesh.nodes)))
    U = first_mode(prob, mesh)
    U[0] = 0.3  # boundary condition violated
    with pytest.raises(ValueError):
        rayleigh_quotient(mesh, 2.0, U)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(31)
    prob = two_phase_problem(p=2.6)
    mesh = make_mesh(prob, 24)
    U = first_mode(prob, mesh) + 0.1 * rng.standard_normal(len(mesh.nodes))
    U[0] = U[-1] = 0.0
    val, grad = quotient_and_gradient(mesh, 2.6, U)
    assert val == pytest.approx(rayleigh_quotient(mesh, 2.6, U), rel=1e-13)
    h = 1e-5
    for j in range(1, len(U) - 1, 3):
        up, um = U.copy(), U.copy()
        up[j] += h
        um[j] -= h
        fd = (rayleigh_quotient(mesh, 2.6, up)
              - rayleigh_quotient(mesh, 2.6, um)) / (2.0 * h)
        scale = max(1.0, abs(fd))
        assert abs(grad[j] - fd) / scale <= 1e-6


def test_gradient_zero_at_boundary_slots():
    prob = constant_problem(p=3.0)
    mesh = make_mesh(prob, 32)
    _, grad = quotient_and_gradient(mesh, 3.0, first_mode(prob, mesh))
    assert grad[0] == 0.0 and grad[-1] == 0.0


# -- lambda1 minimization ------------------------------------------------


def test_minimize_constant_p2_benchmark():
    val, U = minimize_lambda1(constant_problem(), 400, 1e-8)
    assert val == pytest.approx(math.pi ** 2, rel=0.005)
    assert np.all(U[1:-1] > 0.0)  # first mode does not change sign


def test_minimize_constant_p3_benchmark():
    val, _ = minimize_lambda1(constant_problem(p=3.0), 200, 1e-8)
    assert val == pytest.approx(pi_p(3.0) ** 3, rel=0.01)


def test_minimize_two_phase_matches_shooting():
    prob = two_phase_problem()
    ref = solve_eigenvalue(prob, 1, 1e-10)
    val, _ = minimize_lambda1(prob, 400, 1e-8)
    assert abs(val - ref) / ref < 0.01


def test_minimize_upper_bounds_and_mesh_monotonicity():
    # Conforming discretization overestimates lambda1, and refinement
    # never increases the discrete minimum.
    prob = two_phase_problem(p=2.0)
    ref = solve_eigenvalue(prob, 1, 1e-10)
    vals = [minimize_lambda1(prob, n, 1e-9)[0] for n in (50, 100, 200, 400)]
    assert all(v >= ref * (1.0 - 1e-9) for v in vals)
    assert all(b <= a * (1.0 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_minimize_history_is_monotone():
    prob = two_phase_problem(p=1.7)
    val, _, history = minimize_lambda1(prob, 100, 1e-8, return_history=True)
    assert history[-1] == pytest.approx(val)
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


def test_minimize_budget_exhaustion_raises():
    prob = two_phase_problem(p=2.2)
    with pytest.raises(NonconvergenceError):
        minimize_lambda1(prob, 100, 1e-13, max_iter=2)


def test_minimize_rejects_tiny_mesh():
    with pytest.raises(ValueError):
        minimize_lambda1(constant_problem(), 8, 1e-8)


# -- lambda2 equalization ------------------------------------------------


def test_equalize_constant_coefficients():
    for p in (1.5, 2.0, 3.0):
        prob = constant_problem(p=p)
        lam2, c = lambda2_equalize(prob, 1e-9)
        assert c == pytest.approx(0.5, abs=1e-7)
        assert lam2 == pytest.approx((2.0 * pi_p(p)) ** p, rel=1e-7)


def test_equalize_matches_shooting_on_two_phase():
    for p in (1.5, 2.0, 3.0):
        prob = two_phase_problem(p=p)
        ref = solve_eigenvalue(prob, 2, 1e-10)
        lam2, c = lambda2_equalize(prob, 1e-8)
        assert abs(lam2 - ref) / ref < 1e-6
        assert 0.0 < c < 1.0


def test_equalize_crossing_matches_second_eigenfunction_zero():
    prob = two_phase_problem(p=2.0)
    eig = solve_eigenpair(prob, 2, 1e-10)
    _, c = lambda2_equalize(prob, 1e-9)
    assert c == pytest.approx(eig.zeros[0], abs=1e-6)


def test_equalize_weight_scaling():
    prob = two_phase_problem(p=2.0)
    scaled = Problem(1.0, 2.0, prob.a, Coefficient.constant(4.0))
    lam2, c = lambda2_equalize(prob, 1e-9)
    lam2s, cs = lambda2_equalize(scaled, 1e-9)
    assert lam2s == pytest.approx(lam2 / 4.0, rel=1e-6)
    assert cs == pytest.approx(c, abs=1e-6)


# -- checkers ------------------------------------------------------------


def test_check_weyl_passes_on_solver_output():
    prob = two_phase_problem(p=2.0)
    eigs = [solve_eigenpair(prob, k, 1e-9) for k in (1, 2, 3)]
    report = check_weyl(prob, eigs)
    assert report["all_ok"]
    for entry in report["entries"]:
        assert entry["margin_low"] >= 0.0
        assert entry["margin_high"] >= 0.0


def test_check_weyl_tight_for_constant_coefficients():
    prob = constant_problem(a=3.0)
    report = check_weyl(prob, [(1, 3.0 * math.pi ** 2)])
    entry = report["entries"][0]
    assert entry["lower"] == pytest.approx(entry["upper"], rel=1e-12)
    assert report["all_ok"]


def test_check_weyl_flags_corruption():
    prob = two_phase_problem(p=2.0)
    lam1 = solve_eigenvalue(prob, 1, 1e-9)
    report = check_weyl(prob, [(1, lam1), (2, 100.0 * lam1)])
    assert not report["all_ok"]
    assert report["entries"][0]["ok"]
    assert not report["entries"][1]["ok"]
    assert report["entries"][1]["margin_high"] < 0.0


def test_check_weyl_accepts_plain_pairs():
    prob = constant_problem()
    report = check_weyl(prob, [(2, 4.0 * math.pi ** 2)])
    assert report["all_ok"]


def test_nodal_measure_hand_bound():
    # a in [1, 4], rho = 1, p = 2, k = 2: bound = (1/4)^(1/2) / 2 = 0.25.
    prob = two_phase_problem(p=2.0)
    eig = solve_eigenpair(prob, 2, 1e-9)
    report = check_nodal_measure(prob, eig)
    assert report["bound"] == pytest.approx(0.25, abs=1e-12)
    assert report["all_ok"]
    assert sum(report["lengths"]) == pytest.approx(1.0, abs=1e-9)


def test_nodal_measure_constant_equality_case():
    prob = constant_problem()
    eig = solve_eigenpair(prob, 2, 1e-9)
    report = check_nodal_measure(prob, eig)
    # both nodal intervals have length 1/2, equal to the bound
    assert report["bound"] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(report["lengths"], [0.5, 0.5], atol=1e-7)
    assert report["all_ok"]


def test_nodal_measure_randomized_k5():
    rng = np.random.default_rng(101)
    breaks = [0.0, 0.35, 0.8, 1.0]
    a = Coefficient.piecewise_constant(breaks, rng.uniform(1.0, 4.0, 3))
    rho = Coefficient.piecewise_constant(breaks, rng.uniform(0.5, 2.0, 3))
    prob = Problem(1.0, 2.0, a, rho)
    eig = solve_eigenpair(prob, 5, 1e-9)
    report = check_nodal_measure(prob, eig)
    assert len(report["lengths"]) == 5
    assert report["all_ok"]


def test_nodal_measure_flags_synthetic_violation():
    prob = two_phase_problem(p=2.0)
    grid = np.linspace(0.0, 1.0, 33)
    fake = Eigenpair(2, 50.0, grid, np.sin(2 * math.pi * grid), (0.05,))
    report = check_nodal_measure(prob, fake)
    assert not report["all_ok"]
