import math
import pathlib

import pytest

import rbsdelab as rl

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def two_period_tree():
    spec = rl.ScenarioSpec.uniform(1.0, 2, 2, 0.5)
    return rl.build_tree(spec)


def test_tree_shape_and_probabilities():
    tree = two_period_tree()
    assert tree.num_nodes == 13
    assert tree.num_leaves == 9
    total = sum(tree.path_prob(n) for n in range(tree.num_nodes) if tree.is_leaf(n))
    assert total == pytest.approx(1.0, abs=1e-14)


def test_snell_value_matches_enumeration():
    tree = two_period_tree()
    obs = rl.terminal_payoff_obstacle(tree, [0.0, 1.0, 1.0], 0.0)
    sol = rl.solve_frozen(tree, obs)
    assert sol.root_value == pytest.approx(0.75, abs=1e-14)
    assert rl.brute_force_value(tree, obs) == pytest.approx(sol.root_value, abs=1e-12)
    assert rl.verify_frozen(tree, sol, obs)["all_pass"]


def test_right_jump_is_charged_to_c():
    tree = two_period_tree()
    n = tree.num_nodes
    obs = rl.Obstacle(at=[2.0] + [0.0] * (n - 1), post=[0.0] * n)
    ok, violations = rl.validate_obstacle(tree, obs)
    assert ok, violations
    sol = rl.solve_frozen(tree, obs)
    assert sol.root_value == 2.0
    assert sol.y_post[0] == 0.0
    assert sol.c_cum[0] == 2.0


def test_invalid_obstacle_is_reported():
    tree = two_period_tree()
    n = tree.num_nodes
    obs = rl.Obstacle(at=[0.0] * n, post=[1.0] + [0.0] * (n - 1))
    ok, violations = rl.validate_obstacle(tree, obs)
    assert not ok
    assert violations[0][0] == 0


def test_picard_solver_and_verification():
    tree = two_period_tree()
    obs = rl.terminal_payoff_obstacle(tree, [0.0, 1.0, 1.0], 0.0)
    driver = rl.AffineDriver(0.3, [0.1, -0.1], [0.05, 0.05])
    assert driver.lipschitz(tree) <= 2.0
    sol = rl.picard_solve(tree, obs, driver)
    assert sol.converged
    report = rl.verify_solution(tree, sol, obs, driver)
    assert report["all_pass"], report


def test_epsilon_optimal_values_reach_the_envelope():
    tree = two_period_tree()
    obs = rl.terminal_payoff_obstacle(tree, [0.0, 1.0, 1.0], 0.0)
    sol = rl.solve_frozen(tree, obs)
    for eps in (0.0, 0.01, 0.1):
        value = rl.epsilon_optimal_value(tree, sol, obs, start=0, eps=eps)
        assert sol.root_value <= value + eps + 1e-12


def test_norms():
    tree = two_period_tree()
    ones = [1.0] * tree.num_nodes
    assert rl.s2_norm(tree, ones, ones, 0.0) == 1.0
    assert rl.s2_norm(tree, ones, ones, 1.0) == pytest.approx(math.e, rel=1e-15)
    zeros = [0.0] * (tree.num_marks * (tree.num_nodes - tree.num_leaves))
    assert rl.h2_norm(tree, zeros, 0.0) == 0.0


def test_scenario_file_loading():
    s = rl.load_scenario(str(SCENARIOS / "two_period.json"))
    sol = s.solve()
    assert sol.root_value == pytest.approx(0.75, abs=1e-14)


def test_state_driver_scenario_iterates_to_a_fixed_point():
    s = rl.load_scenario(str(SCENARIOS / "affine.json"))
    assert not s.frozen
    sol = s.solve()
    assert sol.converged
    assert sol.iterations > 1


def test_input_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        rl.load_scenario('{"horizon": 1.0}')
