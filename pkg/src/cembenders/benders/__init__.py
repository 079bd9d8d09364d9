"""Cutting-plane decomposition: sub-problems, cuts, the planning problem and the loop."""

from .subproblem import SubResult, solve_subproblem, subproblem_lp
from .master import (
    Cut, MasterState, PlanningSpace, TraceRow, build_planning_problem, candidate_cost,
    compute_upper_bound, planning_space,
)
from .loop import (
    CONVERGED, KINDS, MAX_ITER, BendersConfig, PlanSolve, RunResult, evaluate,
    planning_selector, run_benders, run_loop, solve_planning,
)
from .report import write_meta, write_run, write_solution, write_timings, write_trace

__all__ = [
    "SubResult", "solve_subproblem", "subproblem_lp",
    "Cut", "MasterState", "PlanningSpace", "TraceRow", "build_planning_problem",
    "candidate_cost", "compute_upper_bound", "planning_space",
    "CONVERGED", "KINDS", "MAX_ITER", "BendersConfig", "PlanSolve", "RunResult", "evaluate",
    "planning_selector", "run_benders", "run_loop", "solve_planning",
    "write_meta", "write_run", "write_solution", "write_timings", "write_trace",
]
