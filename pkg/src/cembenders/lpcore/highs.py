"""LP and convex QP solves backed by the HiGHS simplex and active-set codes.

LPs go through the dual simplex so that the returned duals are basic (vertex)
duals; Benders cuts built from interior duals are valid but weaker.
"""

from __future__ import annotations

import highspy
import numpy as np
import scipy.sparse as sp

from ..errors import NumericalBreakdown
from .problem import (
    EQ, GE, INFEASIBLE, ITERATION_LIMIT, LE, OPTIMAL, UNBOUNDED,
    LPProblem, PrimalDualSolution, SolveOptions,
)

_INF = highspy.kHighsInf
_MS = highspy.HighsModelStatus

_STATUS = {
    _MS.kOptimal: OPTIMAL,
    _MS.kInfeasible: INFEASIBLE,
    _MS.kUnbounded: UNBOUNDED,
    _MS.kIterationLimit: ITERATION_LIMIT,
    _MS.kTimeLimit: ITERATION_LIMIT,
}


def _row_bounds(p: LPProblem) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(p.num_rows, -_INF)
    hi = np.full(p.num_rows, _INF)
    le, ge, eq = p.senses == LE, p.senses == GE, p.senses == EQ
    hi[le] = p.rhs[le]
    lo[ge] = p.rhs[ge]
    lo[eq] = p.rhs[eq]
    hi[eq] = p.rhs[eq]
    return lo, hi


def _finite(v: np.ndarray) -> np.ndarray:
    return np.where(np.isposinf(v), _INF, np.where(np.isneginf(v), -_INF, v))


def _build_lp(p: LPProblem) -> highspy.HighsLp:
    lp = highspy.HighsLp()
    lp.num_col_ = p.num_cols
    lp.num_row_ = p.num_rows
    lp.col_cost_ = p.c
    lp.col_lower_ = _finite(p.lb)
    lp.col_upper_ = _finite(p.ub)
    lo, hi = _row_bounds(p)
    lp.row_lower_ = lo
    lp.row_upper_ = hi
    lp.offset_ = float(p.offset)
    csc = sp.csc_matrix(p.A)
    csc.sort_indices()
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.num_col_ = p.num_cols
    lp.a_matrix_.num_row_ = p.num_rows
    lp.a_matrix_.start_ = csc.indptr.astype(np.int32)
    lp.a_matrix_.index_ = csc.indices.astype(np.int32)
    lp.a_matrix_.value_ = csc.data
    return lp


def _new_highs(opts: SolveOptions, **extra) -> highspy.Highs:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    # Solver tolerances sit two orders below the acceptance tolerances.
    h.setOptionValue("primal_feasibility_tolerance", min(1e-9, opts.feasibility_tol))
    h.setOptionValue("dual_feasibility_tolerance", min(1e-9, opts.optimality_tol))
    if np.isfinite(opts.time_limit):
        h.setOptionValue("time_limit", float(opts.time_limit))
    for k, v in extra.items():
        h.setOptionValue(k, v)
    return h


def _run(h: highspy.Highs, n: int, m: int, name: str) -> PrimalDualSolution:
    h.run()
    ms = h.getModelStatus()
    if ms == _MS.kUnboundedOrInfeasible:
        # Presolve could not separate the two cases; rerun without it.
        h.setOptionValue("presolve", "off")
        h.clearSolver()
        h.run()
        ms = h.getModelStatus()
    status = _STATUS.get(ms)
    if status is None:
        raise NumericalBreakdown(f"{name}: HiGHS returned {ms}", model_status=str(ms))
    info = h.getInfo()
    sol = h.getSolution()
    if status == OPTIMAL:
        x = np.array(sol.col_value, dtype=float)
        duals = np.array(sol.row_dual, dtype=float)
        rc = np.array(sol.col_dual, dtype=float)
        obj = float(info.objective_function_value)
    else:
        x = np.full(n, np.nan)
        duals = np.full(m, np.nan)
        rc = np.full(n, np.nan)
        obj = {INFEASIBLE: np.inf, UNBOUNDED: -np.inf}.get(status, np.nan)
    iters = int(info.simplex_iteration_count) + int(info.qp_iteration_count)
    return PrimalDualSolution(status, x, obj, duals, rc, iterations=iters)


def _check(p: LPProblem, sol: PrimalDualSolution, opts: SolveOptions) -> None:
    scale = 1.0 + np.abs(p.rhs).max(initial=0.0)
    resid = p.violation(sol.x)
    sol.info["primal_residual"] = resid
    if resid > opts.feasibility_tol * scale:
        raise NumericalBreakdown(
            f"{p.name}: primal residual {resid:.3e} after solve", residual=resid)


def solve_lp(p: LPProblem, opts: SolveOptions | None = None) -> PrimalDualSolution:
    """Solve a linear program with the dual simplex, returning vertex duals."""
    opts = opts or SolveOptions()
    if p.Q is not None and p.Q.nnz:
        raise ValueError("solve_lp called with a quadratic objective; use solve_qp")
    lp = _build_lp(p)
    last: Exception | None = None
    # Second attempt forces a different scaling strategy before giving up.
    for scale_strategy in (None, 4):
        extra = {"solver": "simplex", "simplex_strategy": 1}
        if scale_strategy is not None:
            extra["simplex_scale_strategy"] = scale_strategy
        h = _new_highs(opts, **extra)
        h.passModel(lp)
        try:
            sol = _run(h, p.num_cols, p.num_rows, p.name)
            if sol.status in (INFEASIBLE, UNBOUNDED):
                # Presolve can misjudge badly scaled rows; confirm without it.
                h = _new_highs(opts, presolve="off", **extra)
                h.passModel(lp)
                sol = _run(h, p.num_cols, p.num_rows, p.name)
            if sol.optimal:
                _check(p, sol, opts)
            return sol
        except NumericalBreakdown as exc:
            last = exc
    raise last


def _is_psd(Q: sp.csr_matrix) -> bool:
    if Q.nnz == 0:
        return True
    off = Q - sp.diags(Q.diagonal())
    if off.nnz == 0 or abs(off).max() == 0.0:
        return bool(np.all(Q.diagonal() >= -1e-12))
    if Q.shape[0] > 2000:
        return True
    return bool(np.linalg.eigvalsh(Q.toarray()).min() >= -1e-9)


def solve_qp(p: LPProblem, opts: SolveOptions | None = None) -> PrimalDualSolution:
    """Solve a convex QP; the quadratic term must be symmetric PSD.

    The interior-point conic solver handles the semidefinite projection
    problems of the regularizer reliably; see :mod:`.conic`.
    """
    opts = opts or SolveOptions()
    if p.Q is None:
        return solve_lp(p, opts)
    if not _is_psd(p.Q):
        raise ValueError("quadratic term is not positive semidefinite")
    from .conic import solve_conic_qp

    sol = solve_conic_qp(p, opts)
    if sol.optimal:
        _check(p, sol, opts)
        sol.info["kkt_residual"] = kkt_residual(p, sol)
    return sol


def kkt_residual(p: LPProblem, sol: PrimalDualSolution) -> float:
    """Largest of the relative stationarity and complementarity errors of ``sol``."""
    from .conic import qp_certificate

    return max(qp_certificate(p, sol))
