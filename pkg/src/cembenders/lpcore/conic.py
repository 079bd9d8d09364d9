"""Convex QP through the Clarabel interior-point solver.

Rows and finite column bounds become one ``A x + s = b`` system with a zero
cone for equalities and a nonnegative cone for everything else.  Multipliers
are mapped back to the d(obj)/d(rhs) convention used by the LP path.

Interior-point codes can stop early on badly scaled data and still report
success, so every answer is checked against an optimality certificate
(:func:`qp_certificate`) and the solve is retried on a recentred
formulation or with other scaling settings before giving up.  Callers that
only need a near-optimal point can widen the accepted complementarity
through ``SolveOptions.qp_gap_tol``.
"""

from __future__ import annotations

import clarabel
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import lsqr

from ..errors import NumericalBreakdown
from .problem import (
    EQ, GE, INFEASIBLE, ITERATION_LIMIT, LE, OPTIMAL, UNBOUNDED, LPProblem, PrimalDualSolution,
    SolveOptions,
)

_TOL = 1e-10
# Tried in order until one answer certifies: (recentre on the objective's
# minimiser, settings overrides).  Reduced-accuracy stops mostly come from
# poor equilibration, hence the longer scaling pass and tighter refinement.
_REFINE = {"iterative_refinement_reltol": 1e-15, "iterative_refinement_abstol": 1e-15,
           "iterative_refinement_max_iter": 30}
_ATTEMPTS = (
    (True, {}),
    (True, {"equilibrate_max_iter": 50}),
    (True, _REFINE),
    (False, {"equilibrate_max_iter": 50}),
    (False, {"equilibrate_enable": False}),
)
# Relative stationarity and complementarity accepted by the certificate.
CERT_TOL = 1e-7


def _status(st) -> str | None:
    name = str(st).split(".")[-1]
    return {"Solved": OPTIMAL, "AlmostSolved": OPTIMAL,
            "PrimalInfeasible": INFEASIBLE, "AlmostPrimalInfeasible": INFEASIBLE,
            "DualInfeasible": UNBOUNDED, "AlmostDualInfeasible": UNBOUNDED,
            "MaxIterations": ITERATION_LIMIT, "MaxTime": ITERATION_LIMIT}.get(name)


def qp_certificate(p: LPProblem, sol: PrimalDualSolution) -> tuple[float, float]:
    """(stationarity, complementarity) of a primal-dual pair, both relative.

    Stationarity measures reduced costs that push against a side with no
    bound, and row multipliers of the wrong sign.  Complementarity sums
    multiplier times slack over rows and bounds; for a feasible pair it
    equals the duality gap without the cancellation of forming both
    objectives.
    """
    x, y, rc = sol.x, sol.duals, sol.reduced_costs
    Qx = p.Q @ x if p.Q is not None else np.zeros_like(x)
    grad = p.c + Qx
    scale = 1.0 + np.abs(grad).max(initial=0.0)
    pos, neg = np.maximum(rc, 0.0), np.minimum(rc, 0.0)
    lo, up = np.isfinite(p.lb), np.isfinite(p.ub)
    loose = np.concatenate([
        np.where(lo, 0.0, pos), np.where(up, 0.0, -neg),
        np.where(p.senses == LE, np.maximum(y, 0.0), 0.0),
        np.where(p.senses == GE, np.maximum(-y, 0.0), 0.0),
    ])
    row_slack = np.abs(p.rhs - p.A @ x)
    comp = (np.abs(y) @ row_slack + pos[lo] @ np.abs(x[lo] - p.lb[lo])
            + (-neg[up]) @ np.abs(p.ub[up] - x[up]))
    primal = float(p.c @ x + 0.5 * x @ Qx + p.offset)
    return float(loose.max(initial=0.0) / scale), float(comp) / (1.0 + abs(primal))


def _centre(p: LPProblem) -> np.ndarray:
    """A minimiser of the objective on its own (least squares of Q x = -c)."""
    return lsqr(sp.csr_matrix(p.Q), -p.c, atol=1e-14, btol=1e-14)[0]


def _shift(p: LPProblem, x0: np.ndarray) -> LPProblem:
    Qx0 = p.Q @ x0
    return p.with_changes(rhs=p.rhs - p.A @ x0, lb=p.lb - x0, ub=p.ub - x0, c=p.c + Qx0,
                          offset=float(p.c @ x0 + 0.5 * x0 @ Qx0 + p.offset))


def _solve_once(p: LPProblem, opts: SolveOptions, tweaks: dict) -> PrimalDualSolution:
    n = p.num_cols
    A = p.A.tocsr()
    eq = np.flatnonzero(p.senses == EQ)
    le = np.flatnonzero(p.senses == LE)
    ge = np.flatnonzero(p.senses == GE)
    lo = np.flatnonzero(np.isfinite(p.lb))
    up = np.flatnonzero(np.isfinite(p.ub))
    eye = sp.identity(n, format="csr")
    M = sp.vstack([A[eq], A[le], -A[ge], -eye[lo], eye[up]], format="csr")
    b = np.concatenate([p.rhs[eq], p.rhs[le], -p.rhs[ge], -p.lb[lo], p.ub[up]])
    # Unit max-norm rows: without this the solver misreports feasible
    # regions with wide coefficient ranges as infeasible.
    rmax = np.asarray(abs(M).max(axis=1).todense()).ravel() if M.shape[0] else np.zeros(0)
    rs = 1.0 / np.where(rmax > 0, rmax, 1.0)
    M = (sp.diags(rs) @ M).tocsc()
    b = b * rs
    cones = []
    if eq.size:
        cones.append(clarabel.ZeroConeT(int(eq.size)))
    n_in = le.size + ge.size + lo.size + up.size
    if n_in:
        cones.append(clarabel.NonnegativeConeT(int(n_in)))
    P = sp.triu(p.Q, format="csc")
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_threads = 1
    for key, value in tweaks.items():
        setattr(settings, key, value)
    settings.tol_gap_abs = settings.tol_gap_rel = _TOL
    settings.tol_feas = min(_TOL, opts.feasibility_tol)
    # Thin level sets get misreported as infeasible at the default
    # thresholds; genuine infeasibility is settled by the simplex probe.
    settings.tol_infeas_abs = settings.tol_infeas_rel = 1e-14
    if np.isfinite(opts.time_limit):
        settings.time_limit = float(opts.time_limit)
    try:
        res = clarabel.DefaultSolver(P, p.c.astype(float), M, b, cones, settings).solve()
    except Exception as exc:  # the extension raises plain exceptions on bad data
        raise NumericalBreakdown(f"{p.name}: conic solver failed: {exc}") from exc
    status = _status(res.status)
    if status is None:
        raise NumericalBreakdown(f"{p.name}: conic solver returned {res.status}",
                                 model_status=str(res.status))
    if status != OPTIMAL:
        nan = np.full(n, np.nan)
        obj = {INFEASIBLE: np.inf, UNBOUNDED: -np.inf}.get(status, np.nan)
        return PrimalDualSolution(status, nan, obj, np.full(p.num_rows, np.nan), nan.copy(),
                                  iterations=int(res.iterations))
    x = np.asarray(res.x, float)
    zd = np.asarray(res.z, float) * rs
    duals = np.zeros(p.num_rows)
    k = 0
    for rows, sign in ((eq, -1.0), (le, -1.0), (ge, 1.0)):
        duals[rows] = sign * zd[k:k + rows.size]
        k += rows.size
    grad = p.c + p.Q @ x
    rc = grad - A.T @ duals
    obj = float(p.c @ x + 0.5 * x @ (p.Q @ x) + p.offset)
    return PrimalDualSolution(OPTIMAL, x, obj, duals, rc, iterations=int(res.iterations))


def _drop_fixed(p: LPProblem):
    """Substitute out columns with lb == ub; returns (reduced problem, free mask).

    A fixed column becomes two opposing bound rows with no interior between
    them, which sends the matching multipliers towards infinity.
    """
    fixed = np.isfinite(p.lb) & (p.lb == p.ub)
    if not fixed.any():
        return p, ~fixed
    free = ~fixed
    xf = p.lb[fixed]
    A = p.A.tocsc()
    Q = sp.csc_matrix(p.Q)
    Qf = Q[:, fixed] @ xf
    q = p.with_changes(
        A=A[:, free], rhs=p.rhs - A[:, fixed] @ xf, c=p.c[free] + Qf[free],
        lb=p.lb[free], ub=p.ub[free], Q=Q[free][:, free],
        offset=float(p.offset + p.c[fixed] @ xf + 0.5 * xf @ Qf[fixed]),
        col_names=None, integers=np.zeros(0, dtype=int))
    return q, free


def _attempt(p: LPProblem, opts: SolveOptions, shift, tweaks: dict) -> PrimalDualSolution:
    sol = _solve_once(p if shift is None else _shift(p, shift), opts, tweaks)
    if shift is not None and sol.status == OPTIMAL:
        sol.x = sol.x + shift
    return sol


def _feasible(p: LPProblem, opts: SolveOptions) -> bool:
    """Feasibility of the constraint set by the simplex route."""
    from .highs import solve_lp

    probe = p.with_changes(c=np.zeros(p.num_cols), Q=None, offset=0.0,
                           integers=np.zeros(0, dtype=int))
    return solve_lp(probe, opts).status != INFEASIBLE


def solve_conic_qp(p: LPProblem, opts: SolveOptions) -> PrimalDualSolution:
    """Certified QP solve; raises :class:`NumericalBreakdown` if no attempt certifies."""
    q, free = _drop_fixed(p)
    x0 = _centre(q)
    notes = []
    for centred, tweaks in _ATTEMPTS:
        try:
            red = _attempt(q, opts, x0 if centred else None, tweaks)
        except NumericalBreakdown as exc:
            notes.append(str(exc))
            continue
        if red.status == INFEASIBLE and _feasible(p, opts):
            notes.append("infeasibility claim refuted by the simplex route")
            continue
        if red.status in (INFEASIBLE, UNBOUNDED):
            # Infeasibility and unboundedness do not depend on the shift.
            return PrimalDualSolution(red.status, np.full(p.num_cols, np.nan), red.objective,
                                      red.duals, np.full(p.num_cols, np.nan),
                                      iterations=red.iterations)
        if red.status != OPTIMAL:
            notes.append(f"solver stopped with {red.status}")
            continue
        x = p.lb.copy()
        x[free] = red.x
        rc = p.c + p.Q @ x - p.A.T @ red.duals
        obj = float(p.c @ x + 0.5 * x @ (p.Q @ x) + p.offset)
        sol = PrimalDualSolution(OPTIMAL, x, obj, red.duals, rc, iterations=red.iterations)
        stat, comp = qp_certificate(p, sol)
        if stat <= CERT_TOL and comp <= max(CERT_TOL, opts.qp_gap_tol):
            sol.info.update(stationarity=stat, complementarity=comp)
            return sol
        notes.append(f"uncertified answer (stationarity {stat:.1e}, complementarity {comp:.1e})")
    if not _feasible(p, opts):
        nan = np.full(p.num_cols, np.nan)
        return PrimalDualSolution(INFEASIBLE, nan, np.inf, np.full(p.num_rows, np.nan), nan.copy())
    raise NumericalBreakdown(f"{p.name}: no certified QP solution: {'; '.join(notes)}")
