"""Level-set regularization of the decomposition loop and the two-stage integer procedure."""

from .level import (
    LevelSetProblem, level_set_bound, level_set_problem, regularize_interior, regularize_l2,
    regularize_trust_region, update_radius, variable_scale,
)
from .runner import (
    LevelSelector, TrustRegionSelector, run_regularized, run_two_stage, selector_for,
    stage_iterations,
)

__all__ = [
    "LevelSetProblem", "level_set_bound", "level_set_problem", "regularize_interior",
    "regularize_l2", "regularize_trust_region", "update_radius", "variable_scale",
    "LevelSelector", "TrustRegionSelector", "run_regularized", "run_two_stage",
    "selector_for", "stage_iterations",
]
