import warnings

import numpy as np
import pytest
from helpers import random_instance, scalar_optimum
from hypothesis import given, settings
from hypothesis import strategies as st

from mecsched import (
    Instance,
    build_p3,
    check_monotonicity,
    grid_power_search,
    makespan_closed_form,
    objective,
    objective_in_xi,
    psi,
    rate,
    rate_inverse_to_power,
    solve_p3,
    xi_lower_bound,
)
from mecsched.powercrt import dual_aggregate, dual_value


def test_weight_constant(channel):
    inst = Instance([1000.0], [800.0])
    assert build_p3([0], inst, 100.0).weight_c == pytest.approx(0.3981, rel=1e-3)
    assert build_p3([0], inst, 0.0).weight_c == 0.0
    assert build_p3([0], inst, 1.0).xi_lower == xi_lower_bound(channel)


def test_single_position_objective():
    inst = Instance([1200.0], [700.0])
    prob = build_p3([0], inst, 10.0)
    xi = np.array([3 * prob.xi_lower])
    expected = 1200.0 * xi[0] + inst.exec_s[0] + prob.weight_c * 1200.0 * psi(xi[0], inst.channel)
    assert objective_in_xi(prob, xi) == pytest.approx(expected, rel=1e-14)


def test_zero_weight_is_makespan(rng):
    inst = random_instance(rng, 6)
    sigma = rng.permutation(6)
    prob = build_p3(sigma, inst, 0.0)
    xi = prob.xi_lower * rng.uniform(1, 5, 6)
    powers = np.empty(6)
    powers[sigma] = rate_inverse_to_power(xi, inst.channel)
    assert objective_in_xi(prob, xi) == pytest.approx(makespan_closed_form(sigma, powers, inst), rel=1e-12)


def test_box_is_enforced():
    inst = Instance([1000.0, 500.0], [800.0, 800.0])
    prob = build_p3([0, 1], inst, 1.0)
    with pytest.raises(ValueError):
        objective_in_xi(prob, np.array([0.5 * prob.xi_lower, prob.xi_lower]))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 1e3))
def test_midpoint_convexity(n, seed, eta):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n)
    prob = build_p3(rng.permutation(n), inst, eta)
    xa = prob.xi_lower * 10 ** rng.uniform(0, 3, n)
    xb = prob.xi_lower * 10 ** rng.uniform(0, 3, n)
    mid = objective_in_xi(prob, 0.5 * (xa + xb))
    assert mid <= 0.5 * (objective_in_xi(prob, xa) + objective_in_xi(prob, xb)) + 1e-12


def test_energy_is_concave_in_power(channel):
    # the power-domain problem is not convex; the change of variables is what makes it so
    p = np.linspace(1e-6, channel.p_max_w, 2001)
    e = p / rate(p, channel)
    assert np.all(e[2:] - 2 * e[1:-1] + e[:-2] < 0)


def test_zero_weight_gives_full_power(rng):
    inst = random_instance(rng, 5)
    sol = solve_p3(build_p3(rng.permutation(5), inst, 0.0))
    assert np.allclose(sol.powers, inst.channel.p_max_w, rtol=1e-12)
    assert check_monotonicity(sol) == (True, 0.0)


@pytest.mark.parametrize("eta", [0.0, 1.0, 10.0, 100.0, 1e4])
def test_single_task_matches_scalar_search(eta):
    inst = Instance([1000.0], [797.5])
    sol = solve_p3(build_p3([0], inst, eta))
    ref = scalar_optimum(inst, eta)
    assert objective([0], sol.powers_by_task, eta, inst).weighted == pytest.approx(ref, rel=1e-9)


def test_two_tasks_match_fine_grid():
    inst = Instance([900.0, 1300.0], [900.0, 500.0])
    for sigma in ([0, 1], [1, 0]):
        sol = solve_p3(build_p3(sigma, inst, 50.0))
        grid = grid_power_search(sigma, inst, 50.0, 2000)
        val = objective(sigma, sol.powers_by_task, 50.0, inst).weighted
        assert val <= grid.best_value * (1 + 1e-12)
        assert val == pytest.approx(grid.best_value, rel=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.floats(-2, 4))
def test_dual_and_smoothed_agree(n, seed, log_eta):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n)
    prob = build_p3(rng.permutation(n), inst, 10.0**log_eta)
    exact = solve_p3(prob)
    smooth = solve_p3(prob, method="smoothed")
    assert exact.converged
    assert smooth.objective_value >= exact.objective_value * (1 - 1e-9)
    assert smooth.objective_value == pytest.approx(exact.objective_value, rel=1e-6)


def test_duality_gap_is_small(rng):
    for _ in range(30):
        n = int(rng.integers(1, 15))
        prob = build_p3(rng.permutation(n), random_instance(rng, n), float(10 ** rng.uniform(-1, 3)))
        agg = dual_aggregate(prob)
        assert agg[0] == 1.0
        assert np.all(np.diff(agg) <= 1e-15)
        sol = solve_p3(prob)
        lower = dual_value(prob, agg)
        assert lower <= sol.objective_value * (1 + 1e-12)
        assert sol.objective_value - lower <= 1e-9 * sol.objective_value


def test_monotone_powers(rng):
    for _ in range(50):
        inst = random_instance(rng, 5)
        for eta in (1.0, 10.0, 100.0):
            sol = solve_p3(build_p3(rng.permutation(5), inst, eta))
            ok, worst = check_monotonicity(sol)
            assert ok, worst


def test_relaxation_is_tight(rng):
    for _ in range(30):
        n = int(rng.integers(1, 9))
        inst = random_instance(rng, n)
        prob = build_p3(rng.permutation(n), inst, 20.0)
        sol = solve_p3(prob)
        direct = objective(prob.sigma, sol.powers_by_task, 20.0, inst).weighted
        assert sol.objective_value == pytest.approx(direct, rel=1e-7)
        assert sol.t_tilde_star[-1] == pytest.approx(makespan_closed_form(prob.sigma, sol.powers_by_task, inst), rel=1e-9)


def test_warm_start_never_worse(rng):
    inst = random_instance(rng, 8)
    prob = build_p3(rng.permutation(8), inst, 30.0)
    xi0 = prob.xi_lower * rng.uniform(1, 20, 8)
    for method in ("dual", "smoothed"):
        sol = solve_p3(prob, method=method, xi0=xi0)
        assert sol.objective_value <= objective_in_xi(prob, xi0)
        assert sol.objective_trace[0] >= sol.objective_trace[-1]


def test_upper_bound_widening():
    # tiny exec times and a huge price push the optimum onto the upper bound
    inst = Instance([1000.0], [1e-3])
    prob = build_p3([0], inst, 1e9, xi_upper_factor=2.0)
    with pytest.warns(RuntimeWarning):
        sol = solve_p3(prob)
    assert sol.xi_star[0] > 2.0 * prob.xi_lower


def test_argument_checks():
    inst = Instance([1000.0], [800.0])
    prob = build_p3([0], inst, 1.0)
    with pytest.raises(ValueError):
        solve_p3(prob, method="newton")
    with pytest.raises(ValueError):
        solve_p3(prob, tol=0.0)
    with pytest.raises(ValueError):
        build_p3([0], inst, -1.0)


def test_no_warning_in_normal_regime(rng):
    inst = random_instance(rng, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_p3(build_p3(np.arange(10), inst, 1e3))
