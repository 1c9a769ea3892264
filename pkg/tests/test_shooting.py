"""Shooting integration, zero counting, and eigenvalue bisection."""

import math

import numpy as np
import pytest

from plapeig import (BracketError, Coefficient, NonconvergenceError, Problem,
                     Trajectory, count_interior_zeros, dsin_p, integrate_ivp,
                     interior_zero_locations, phi_p, pi_p,
                     propagate_piecewise_constant, sin_p, solve_eigenpair,
                     solve_eigenvalue, weyl_bracket)


def constant_problem(p=2.0, a=1.0, rho=1.0, length=1.0):
    return Problem(length, p,
                   Coefficient.constant(a, (0.0, length)),
                   Coefficient.constant(rho, (0.0, length)))


def two_phase_problem(p=2.0, a_vals=(1.0, 4.0), rho=1.0, length=1.0):
    a = Coefficient.piecewise_constant([0.0, 0.5 * length, length], list(a_vals))
    return Problem(length, p, a, Coefficient.constant(rho, (0.0, length)))


# -- integrate_ivp ------------------------------------------------------


def test_zero_lambda_gives_linear_solution():
    t = integrate_ivp(constant_problem(), 0.0, 0.0, 1.0, steps_per_unit=100)
    np.testing.assert_allclose(t.u, t.grid, atol=1e-12)
    np.testing.assert_allclose(t.v, 1.0, atol=1e-14)


def test_zero_lambda_flux_constant_across_jumps():
    prob = two_phase_problem(p=3.0)
    t = integrate_ivp(prob, 0.0, 0.0, 1.0, steps_per_unit=200)
    np.testing.assert_allclose(t.v, 1.0, atol=1e-12)


def test_endpoint_zero_at_first_eigenvalue_p2():
    lam = math.pi ** 2
    t = integrate_ivp(constant_problem(), lam, steps_per_unit=10_000)
    assert abs(t.u[-1]) < 1e-6
    assert t.hamiltonian_drift < 1e-8


def test_endpoint_zero_at_first_eigenvalue_p3():
    lam = pi_p(3.0) ** 3
    t = integrate_ivp(constant_problem(p=3.0), lam, steps_per_unit=10_000)
    assert abs(t.u[-1]) < 1e-5
    # Drift through the turning point decays like h^{3/2} for p != 2.
    assert t.hamiltonian_drift < 1e-6


def test_drift_meets_production_target():
    # p = 2 state is smooth: drift is at rounding level already at 1e4
    # steps.  For p != 2 the h^{3/2} turning-point scaling puts the 1e-8
    # target near 2e5 steps per unit.
    t = integrate_ivp(two_phase_problem(p=2.0), 60.0, steps_per_unit=10_000)
    assert t.hamiltonian_drift < 1e-10
    lam = pi_p(3.0) ** 3
    t = integrate_ivp(constant_problem(p=3.0), lam, steps_per_unit=200_000)
    assert t.hamiltonian_drift < 1e-8


def test_integrate_rejects_bad_inputs():
    prob = constant_problem()
    with pytest.raises(ValueError):
        integrate_ivp(prob, -1.0)
    with pytest.raises(ValueError):
        integrate_ivp(prob, 1.0, 0.0, 0.0)


def test_drift_ceiling_raises_on_coarse_steps():
    prob = constant_problem(p=3.0)
    with pytest.raises(NonconvergenceError):
        integrate_ivp(prob, 200.0, steps_per_unit=8, drift_ceiling=1e-12)


def test_trajectory_csv_round_trip(tmp_path):
    t = integrate_ivp(constant_problem(), 10.0, steps_per_unit=50)
    path = tmp_path / "traj.csv"
    t.write_csv(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    np.testing.assert_allclose(data["x"], t.grid, atol=1e-14)
    np.testing.assert_allclose(data["u"], t.u, atol=1e-14)
    np.testing.assert_allclose(data["v"], t.v, atol=1e-14)


# -- zero counting ------------------------------------------------------


def test_zero_count_brackets_mu_k():
    prob = constant_problem()
    mu = [(math.pi * k) ** 2 for k in range(1, 4)]
    t = integrate_ivp(prob, 0.5 * mu[0], steps_per_unit=2000)
    assert count_interior_zeros(t) == 0
    t = integrate_ivp(prob, 1.05 * mu[1], steps_per_unit=2000)
    assert count_interior_zeros(t) == 2


def test_zero_count_on_synthetic_sin_p_samples():
    # Third constant-coefficient mode: two interior zeros at 1/3, 2/3.
    p = 2.5
    pip = pi_p(p)
    grid = np.linspace(0.0, 1.0, 4001)
    u = np.array([sin_p(p, 3.0 * pip * x) for x in grid])
    v = np.array([phi_p(p, 3.0 * pip * dsin_p(p, 3.0 * pip * x)) for x in grid])
    t = Trajectory(grid=grid, u=u, v=v, hamiltonian_drift=0.0)
    assert count_interior_zeros(t) == 2
    zs = interior_zero_locations(t)
    np.testing.assert_allclose(zs, [1.0 / 3.0, 2.0 / 3.0], atol=1e-9)


def test_zero_count_handles_exact_nodes():
    grid = np.linspace(0.0, 1.0, 9)
    u = np.sin(2.0 * math.pi * grid)  # exact zeros at 0, 0.5, 1
    t = Trajectory(grid=grid, u=u, v=np.cos(2.0 * math.pi * grid),
                   hamiltonian_drift=0.0)
    assert count_interior_zeros(t) == 1


# -- weyl_bracket -------------------------------------------------------


def test_bracket_contains_constant_eigenvalues():
    for c in (0.5, 1.0, 3.0):
        for k in (1, 2, 5):
            prob = constant_problem(a=c)
            lo, hi = weyl_bracket(prob, k)
            lam = c * (math.pi * k) ** 2
            assert lo < lam < hi


def test_bracket_covers_the_sandwich():
    prob = two_phase_problem()
    lo, hi = weyl_bracket(prob, 2)
    assert lo <= 4.0 * math.pi ** 2
    assert hi >= 16.0 * math.pi ** 2


def test_bracket_rejects_bad_k():
    with pytest.raises(ValueError):
        weyl_bracket(constant_problem(), 0)


# -- closed-form propagation --------------------------------------------


def test_propagate_requires_piecewise_constant():
    a = Coefficient.piecewise_linear([0.0, 1.0], [1.0, 2.0])
    prob = Problem(1.0, 2.0, a, Coefficient.constant(1.0))
    with pytest.raises(ValueError):
        propagate_piecewise_constant(prob, 1.0)


def test_propagate_single_piece_hits_boundary_zero():
    for p in (1.5, 2.0, 3.0):
        prob = constant_problem(p=p)
        lam = pi_p(p) ** p
        u_end, _, nz = propagate_piecewise_constant(prob, lam)
        assert abs(u_end) < 1e-11
        assert nz == 0


def test_propagate_zero_lambda_flux():
    prob = two_phase_problem(p=2.0)
    u_end, v_end, nz = propagate_piecewise_constant(prob, 0.0)
    assert v_end == pytest.approx(1.0, abs=1e-14)
    # u(1) = int_0^1 v/a dx = 0.5*1 + 0.5/4
    assert u_end == pytest.approx(0.625, abs=1e-12)
    assert nz == 0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_exact_and_rk4_agree_on_two_phase(p):
    prob = two_phase_problem(p=p)
    rng = np.random.default_rng(17)
    lo, hi = weyl_bracket(prob, 1)
    for lam in rng.uniform(lo, hi, 3):
        lam = float(lam)
        u_ref, v_ref, _ = propagate_piecewise_constant(prob, lam)
        t = integrate_ivp(prob, lam, steps_per_unit=10_000)
        assert abs(float(t.u[-1]) - u_ref) <= 1e-6
        # v carries the h^{3/2} turning-point error, so it trails u.
        assert abs(float(t.v[-1]) - v_ref) <= 1e-5 * max(1.0, abs(v_ref))


# -- eigenvalue solving -------------------------------------------------


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_constant_coefficient_spectrum(p):
    prob = constant_problem(p=p)
    pip = pi_p(p)
    for k in (1, 2, 3, 7):
        lam = solve_eigenvalue(prob, k, 1e-10)
        exact = (pip * k) ** p
        assert lam == pytest.approx(exact, rel=1e-8)


def test_solve_k3_p2_example():
    lam = solve_eigenvalue(constant_problem(), 3, 1e-10)
    assert lam == pytest.approx(9.0 * math.pi ** 2, rel=1e-8)


def test_solve_scaled_diffusion():
    lam = solve_eigenvalue(constant_problem(a=2.0), 1, 1e-10)
    assert lam == pytest.approx(2.0 * math.pi ** 2, rel=1e-8)


def test_solve_p3_first_eigenvalue():
    lam = solve_eigenvalue(constant_problem(p=3.0), 1, 1e-10)
    assert lam == pytest.approx(pi_p(3.0) ** 3, rel=1e-8)


def test_weight_scaling_inverts_eigenvalues():
    base = two_phase_problem(p=2.5)
    scaled = Problem(1.0, 2.5, base.a, Coefficient.constant(4.0))
    for k in (1, 3):
        lam = solve_eigenvalue(base, k, 1e-10)
        lam_scaled = solve_eigenvalue(scaled, k, 1e-10)
        assert lam_scaled == pytest.approx(lam / 4.0, rel=1e-8)


def test_eigenvalues_increase_with_k():
    rng = np.random.default_rng(23)
    breaks = [0.0, 0.3, 0.7, 1.0]
    for p in (1.5, 3.0):
        a = Coefficient.piecewise_constant(breaks, rng.uniform(0.5, 4.0, 3))
        rho = Coefficient.piecewise_constant(breaks, rng.uniform(0.5, 4.0, 3))
        prob = Problem(1.0, p, a, rho)
        lams = [solve_eigenvalue(prob, k, 1e-9) for k in range(1, 7)]
        assert all(b > a for a, b in zip(lams, lams[1:]))


def test_eigenpair_structure():
    prob = two_phase_problem(p=2.0)
    for k in (1, 2, 4):
        eig = solve_eigenpair(prob, k, 1e-9)
        assert eig.k == k
        assert len(eig.zeros) == k - 1
        assert eig.u[0] == 0.0 and eig.u[-1] == 0.0
        assert eig.u[1] > 0.0  # sign convention u'(0) > 0
        norm = np.trapezoid(np.abs(eig.u) ** 2, eig.grid) ** 0.5
        assert norm == pytest.approx(1.0, abs=1e-8)
        assert all(0.0 < z < 1.0 for z in eig.zeros)
        assert all(b > a for a, b in zip(eig.zeros, eig.zeros[1:]))


def test_eigenpair_zeros_match_constant_modes():
    eig = solve_eigenpair(constant_problem(p=3.0), 3, 1e-10)
    np.testing.assert_allclose(eig.zeros, [1.0 / 3.0, 2.0 / 3.0], atol=1e-8)


def test_solve_via_rk4_route():
    # Piecewise-linear coefficient forces the integrator path.
    a = Coefficient.piecewise_linear([0.0, 1.0], [1.0, 1.0])
    prob = Problem(1.0, 2.0, a, Coefficient.constant(1.0))
    lam = solve_eigenvalue(prob, 1, 1e-8, steps_per_unit=2000)
    assert lam == pytest.approx(math.pi ** 2, rel=1e-7)


def test_rk4_eigenpair_zeros():
    a = Coefficient.piecewise_linear([0.0, 1.0], [1.0, 1.0])
    prob = Problem(1.0, 2.0, a, Coefficient.constant(1.0))
    eig = solve_eigenpair(prob, 2, 1e-7, steps_per_unit=1500)
    assert len(eig.zeros) == 1
    assert eig.zeros[0] == pytest.approx(0.5, abs=1e-5)


def test_bracket_override_failures():
    prob = constant_problem()
    mu1 = math.pi ** 2
    with pytest.raises(BracketError):
        solve_eigenvalue(prob, 1, 1e-9, bracket=(2.0 * mu1, 3.0 * mu1))
    with pytest.raises(BracketError):
        solve_eigenvalue(prob, 1, 1e-9, bracket=(0.1 * mu1, 0.5 * mu1))
    with pytest.raises(ValueError):
        solve_eigenvalue(prob, 1, 1e-9, bracket=(-1.0, 5.0))


def test_nonconvergence_on_tiny_budget():
    with pytest.raises(NonconvergenceError):
        solve_eigenvalue(constant_problem(), 1, 1e-12, max_iter=3)


def test_solve_rejects_bad_arguments():
    prob = constant_problem()
    with pytest.raises(ValueError):
        solve_eigenvalue(prob, 0)
    with pytest.raises(ValueError):
        solve_eigenvalue(prob, 1, -1e-9)
