"""Problem and solution containers shared by every solver in :mod:`lpcore`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "L", "E", "G"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"
NODE_LIMIT = "node-limit"

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
INT_TOL = 1e-6
MIP_GAP = 1e-3


@dataclass
class SolveOptions:
    feasibility_tol: float = FEAS_TOL
    optimality_tol: float = OPT_TOL
    integrality_tol: float = INT_TOL
    mip_gap: float = MIP_GAP
    max_int_columns: int = 200
    node_limit: int = 20000
    time_limit: float = float("inf")
    # Relative complementarity accepted from the QP path.
    qp_gap_tol: float = 1e-7


@dataclass
class LPProblem:
    """min c.x + 1/2 x'Qx + offset  s.t.  rows(A x) sense rhs,  lb <= x <= ub.

    ``senses`` holds one of ``"L"`` (<=), ``"E"`` (=), ``"G"`` (>=) per row.
    ``integers`` lists columns restricted to integer values; a non-empty set
    turns the container into a MILP for :func:`solve_milp`.
    """

    A: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    Q: sp.csr_matrix | None = None
    offset: float = 0.0
    col_names: list[str] | None = None
    row_names: list[str] | None = None
    integers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    name: str = "problem"

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.senses = np.asarray(self.senses, dtype="<U1")
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        self.integers = np.asarray(self.integers, dtype=int)
        m, n = self.A.shape
        if self.senses.shape != (m,) or self.rhs.shape != (m,):
            raise ValueError(f"row data must have length {m}")
        if self.c.shape != (n,) or self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError(f"column data must have length {n}")
        if np.any(self.lb > self.ub):
            j = int(np.flatnonzero(self.lb > self.ub)[0])
            raise ValueError(f"column {j} has lower bound above upper bound")
        if not set(np.unique(self.senses)) <= {LE, EQ, GE}:
            raise ValueError("row senses must be L, E or G")
        if self.Q is not None:
            self.Q = sp.csr_matrix(self.Q, dtype=float)
            if self.Q.shape != (n, n):
                raise ValueError("quadratic term must be n x n")
            if self.Q.nnz and abs(self.Q - self.Q.T).max() > 1e-12:
                raise ValueError("quadratic term must be symmetric")
        if self.col_names is None:
            self.col_names = [f"c{j}" for j in range(n)]
        if self.row_names is None:
            self.row_names = [f"r{i}" for i in range(m)]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_cols(self) -> int:
        return self.A.shape[1]

    @property
    def is_mip(self) -> bool:
        return self.integers.size > 0

    def objective(self, x: np.ndarray) -> float:
        val = float(self.c @ x) + self.offset
        if self.Q is not None:
            val += 0.5 * float(x @ (self.Q @ x))
        return val

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def violation(self, x: np.ndarray) -> float:
        """Largest absolute violation of any row or bound at ``x``."""
        act = self.row_activity(x)
        viol = np.zeros(self.num_rows)
        le = self.senses == LE
        ge = self.senses == GE
        eq = self.senses == EQ
        viol[le] = np.maximum(act[le] - self.rhs[le], 0.0)
        viol[ge] = np.maximum(self.rhs[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - self.rhs[eq])
        bnd = np.maximum(np.maximum(self.lb - x, x - self.ub), 0.0)
        return float(max(viol.max(initial=0.0), bnd.max(initial=0.0)))

    def relaxed(self) -> "LPProblem":
        return self.with_changes(integers=np.zeros(0, dtype=int))

    def with_changes(self, **kw) -> "LPProblem":
        data = dict(
            A=self.A, senses=self.senses, rhs=self.rhs, c=self.c, lb=self.lb,
            ub=self.ub, Q=self.Q, offset=self.offset, col_names=self.col_names,
            row_names=self.row_names, integers=self.integers, name=self.name,
        )
        data.update(kw)
        return LPProblem(**data)


def MILPProblem(lp: LPProblem, integers) -> LPProblem:
    """An :class:`LPProblem` with integrality imposed on ``integers``."""
    return lp.with_changes(integers=np.asarray(sorted(set(int(i) for i in integers)), dtype=int))


@dataclass
class PrimalDualSolution:
    """Solver output.

    ``duals`` are objective sensitivities d(obj)/d(rhs) per row and
    ``reduced_costs`` are d(obj)/d(bound) per column.  Use
    :meth:`multipliers` for the sign-normalised KKT multipliers.
    """

    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def multipliers(self, problem: LPProblem) -> np.ndarray:
        """KKT multipliers: nonnegative for binding inequalities, sensitivity for equalities."""
        mult = self.duals.copy()
        le = problem.senses == LE
        mult[le] = -mult[le]
        return mult

    def dual_objective(self, problem: LPProblem) -> float:
        """Lagrangian dual value for a linear problem (ignores Q)."""
        val = float(problem.rhs @ self.duals) + problem.offset
        d = self.reduced_costs
        lo = np.where(np.isfinite(problem.lb), problem.lb, 0.0)
        up = np.where(np.isfinite(problem.ub), problem.ub, 0.0)
        val += float(np.sum(np.where(d > 0, d * lo, d * up)))
        return val


@dataclass
class MILPSolution(PrimalDualSolution):
    bound: float = float("-inf")
    gap: float = float("inf")
    nodes: int = 0
    bound_trace: list = field(default_factory=list)


def relative_gap(upper: float, lower: float) -> float:
    """(U - L) / |L| with the convention 0/0 = 0."""
    diff = upper - lower
    if not np.isfinite(diff):
        return float("inf")
    scale = abs(lower)
    if scale < 1e-9:
        return 0.0 if abs(diff) <= 1e-9 else float("inf")
    return diff / scale
