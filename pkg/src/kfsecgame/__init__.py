"""Security games on multi-sensor Kalman filtering under false-data injection.

Builds linear-Gaussian tracking models, evaluates the estimation damage of
power-constrained bias injections, assembles the zero-sum payoff matrix over
sensor subsets, solves for mixed-strategy saddle points by linear
programming, and validates the equilibrium by Monte Carlo simulation.
"""

from .attacks import (
    AllocationRule,
    AttackPlan,
    EmseResult,
    allocate_dependent,
    allocate_independent,
    effective_sigma,
    emse_continuous,
    emse_single_injection,
    make_plan,
    oracle_best_allocation,
)
from .dynamics import (
    FilterState,
    Sensor,
    SensorSubset,
    SensorSuite,
    SystemModel,
    build_dwna_example,
    dwna_model,
    kalman_gain_history,
    kalman_recursion,
    position_sensor_suite,
    simulate_trajectory,
    stack_measurement_model,
)
from .game import (
    GameSolution,
    LpError,
    MixedStrategy,
    find_pure_saddle,
    solve_attacker_lp,
    solve_defender_lp,
    solve_game,
)
from .payoff import (
    PayoffMatrix,
    build_payoff_matrix,
    dependent_variant_report,
    enumerate_subsets,
    format_payoff_table,
    payoff_entry,
    payoff_from_csv,
    payoff_to_csv,
)
from .simulate import (
    MseCurve,
    Scenario,
    curves_to_csv,
    point_mass,
    run_scenario_suite,
    run_scenarios,
    run_scenarios_with_errors,
    run_trial,
    standard_scenarios,
    suite_summary,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationRule",
    "AttackPlan",
    "EmseResult",
    "FilterState",
    "GameSolution",
    "LpError",
    "MixedStrategy",
    "MseCurve",
    "PayoffMatrix",
    "Scenario",
    "Sensor",
    "SensorSubset",
    "SensorSuite",
    "SystemModel",
    "allocate_dependent",
    "allocate_independent",
    "build_dwna_example",
    "build_payoff_matrix",
    "curves_to_csv",
    "dependent_variant_report",
    "dwna_model",
    "effective_sigma",
    "emse_continuous",
    "emse_single_injection",
    "enumerate_subsets",
    "find_pure_saddle",
    "format_payoff_table",
    "kalman_gain_history",
    "kalman_recursion",
    "make_plan",
    "oracle_best_allocation",
    "payoff_entry",
    "payoff_from_csv",
    "payoff_to_csv",
    "point_mass",
    "position_sensor_suite",
    "run_scenario_suite",
    "run_scenarios",
    "run_scenarios_with_errors",
    "run_trial",
    "simulate_trajectory",
    "solve_attacker_lp",
    "solve_defender_lp",
    "solve_game",
    "stack_measurement_model",
    "standard_scenarios",
    "suite_summary",
]
