"""Scenario-tree laboratory for reflected backward stochastic equations."""

from ._core import (  # noqa: F401
    AffineDriver,
    EventTree,
    LoadedScenario,
    Obstacle,
    PicardParams,
    ScenarioSpec,
    Solution,
    __version__,
    brute_force_value,
    build_tree,
    constant_obstacle,
    epsilon_optimal_value,
    h2_norm,
    load_scenario,
    picard_solve,
    s2_norm,
    solve_frozen,
    terminal_payoff_obstacle,
    validate_obstacle,
    verify_frozen,
    verify_solution,
)
