"""Desk-scale optimisation kernels: LP with vertex duals, convex QP, MILP
branch and bound, interior centers and an MPS/solution-file adapter."""

from .centers import CenterResult, analytic_center, chebyshev_center
from .highs import kkt_residual, solve_lp, solve_qp
from .milp import solve_milp
from .mps import export_mps, import_solution, read_mps, write_solution
from .problem import (
    EQ, GE, INFEASIBLE, LE, NODE_LIMIT, OPTIMAL, UNBOUNDED, LPProblem,
    MILPProblem, MILPSolution, PrimalDualSolution, SolveOptions, relative_gap,
)

__all__ = [
    "CenterResult", "analytic_center", "chebyshev_center", "kkt_residual",
    "solve_lp", "solve_qp", "solve_milp", "export_mps", "import_solution",
    "read_mps", "write_solution", "EQ", "GE", "LE", "INFEASIBLE", "NODE_LIMIT",
    "OPTIMAL", "UNBOUNDED", "LPProblem", "MILPProblem", "MILPSolution",
    "PrimalDualSolution", "SolveOptions", "relative_gap",
]
