"""Optimal weighted Bonferroni procedures for two-trial replication designs.

Weights for the second trial are chosen to maximize the disjunctive power
of the weighted Bonferroni test, using effect estimates from the first
trial, and a Monte Carlo engine estimates the resulting probability of
success and error rates.
"""

from . import gauss
from .mtp import (ProblemSpec, adjusted_p, bonferroni, weighted_bonferroni,
                  z_to_p)
from .power import AlternativeSet, disjunctive_power, marginal_power
from .replication import (ReplicationResult, estimate_alt_set,
                          run_replication, unweighted_pos_closed_form)
from .simlab import (FAMILIES, Family, ScenarioSpec, SimSummary, fwer_check,
                     run_family_scenario, run_scenario, sweep_curve,
                     sweep_heatmap)
from .solver import (NoConvergence, NonPositiveMean, SolveReport,
                     SolverConfig, TooManyDimensions, optimal_weights,
                     solve_fixed_point, solve_grid, solve_multistart)

__all__ = [
    "AlternativeSet", "FAMILIES", "Family", "NoConvergence",
    "NonPositiveMean", "ProblemSpec", "ReplicationResult", "ScenarioSpec",
    "SimSummary", "SolveReport", "SolverConfig", "TooManyDimensions",
    "adjusted_p", "bonferroni", "disjunctive_power", "estimate_alt_set",
    "fwer_check", "gauss", "marginal_power", "optimal_weights",
    "run_family_scenario", "run_replication", "run_scenario", "solve_fixed_point",
    "solve_grid", "solve_multistart", "sweep_curve", "sweep_heatmap",
    "unweighted_pos_closed_form", "weighted_bonferroni", "z_to_p",
]

__version__ = "0.1.0"
