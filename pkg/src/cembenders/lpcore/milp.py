"""Best-first branch and bound over LP relaxations."""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..errors import NodeLimit
from .highs import solve_lp
from .problem import (
    INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED, LPProblem, MILPSolution,
    SolveOptions, relative_gap,
)


def _most_fractional(x: np.ndarray, integers: np.ndarray, tol: float) -> int | None:
    frac = np.abs(x[integers] - np.round(x[integers]))
    if frac.size == 0 or frac.max() <= tol:
        return None
    dist = np.abs(frac - 0.5)
    # Ties resolve to the lowest column index (argmin takes the first).
    return int(integers[int(np.argmin(np.where(frac > tol, dist, np.inf)))])


def solve_milp(p: LPProblem, opts: SolveOptions | None = None, *, raise_on_limit: bool = False) -> MILPSolution:
    """Minimise a MILP by best-first branch and bound.

    Nodes are explored in order of their relaxation bound, ties going to the
    lowest node id, which makes the search fully deterministic.  Branching
    picks the most fractional integer column.  A node is pruned once its
    bound cannot improve the incumbent by more than ``opts.mip_gap``
    relative.  If the node budget runs out the current incumbent is returned
    with status ``node-limit`` (or :class:`NodeLimit` is raised when
    ``raise_on_limit`` is set).
    """
    opts = opts or SolveOptions()
    ints = p.integers
    if ints.size > opts.max_int_columns:
        raise ValueError(
            f"{ints.size} integer columns exceeds the desk-scale guard of {opts.max_int_columns}")
    lb0 = p.lb.copy()
    ub0 = p.ub.copy()
    lb0[ints] = np.ceil(lb0[ints] - opts.integrality_tol)
    ub0[ints] = np.floor(ub0[ints] + opts.integrality_tol)
    base = p.relaxed()

    def relax(lb, ub):
        return solve_lp(base.with_changes(lb=lb, ub=ub), opts)

    root = relax(lb0, ub0)
    if root.status in (INFEASIBLE, UNBOUNDED):
        return MILPSolution(root.status, root.x, root.objective, root.duals,
                            root.reduced_costs, bound=root.objective)

    incumbent = None
    inc_obj = math.inf
    best_bound = root.objective
    bound_trace = []
    heap = [(root.objective, 0, lb0, ub0, root)]
    next_id = 1
    nodes = 0
    pruned = math.inf  # smallest bound among nodes discarded by the gap test

    def gap_closed(bound: float) -> bool:
        return incumbent is not None and (
            bound >= inc_obj - opts.mip_gap * max(abs(inc_obj), 1e-9))

    while heap:
        bound, nid, lb, ub, sol = heapq.heappop(heap)
        best_bound = max(best_bound, bound)
        bound_trace.append(best_bound)
        if gap_closed(bound):
            pruned = min(pruned, bound)
            heap.clear()
            break
        nodes += 1
        if nodes > opts.node_limit:
            heapq.heappush(heap, (bound, nid, lb, ub, sol))
            break
        j = _most_fractional(sol.x, ints, opts.integrality_tol)
        if j is None:
            if sol.objective < inc_obj:
                incumbent, inc_obj = sol, sol.objective
            continue
        v = sol.x[j]
        for side in (0, 1):
            clb, cub = lb.copy(), ub.copy()
            if side == 0:
                cub[j] = math.floor(v)
            else:
                clb[j] = math.ceil(v)
            if clb[j] > cub[j]:
                continue
            child = relax(clb, cub)
            if child.status != OPTIMAL:
                continue
            if incumbent is not None and gap_closed(child.objective):
                pruned = min(pruned, child.objective)
                continue
            heapq.heappush(heap, (max(child.objective, bound), next_id, clb, cub, child))
            next_id += 1

    open_min = min((h[0] for h in heap), default=math.inf)
    final_bound = min(open_min, pruned, inc_obj)
    if math.isfinite(final_bound):
        best_bound = final_bound

    if incumbent is None:
        status = NODE_LIMIT if heap else INFEASIBLE
        res = MILPSolution(status, np.full(p.num_cols, np.nan), math.inf,
                           np.full(p.num_rows, np.nan), np.full(p.num_cols, np.nan),
                           bound=best_bound, nodes=nodes, bound_trace=bound_trace)
    else:
        x = incumbent.x.copy()
        x[ints] = np.round(x[ints])
        gap = relative_gap(inc_obj, best_bound)
        status = NODE_LIMIT if heap and gap > opts.mip_gap else OPTIMAL
        res = MILPSolution(status, x, inc_obj, incumbent.duals, incumbent.reduced_costs,
                           bound=best_bound, gap=max(gap, 0.0), nodes=nodes,
                           bound_trace=bound_trace)
    if res.status == NODE_LIMIT and raise_on_limit:
        raise NodeLimit(f"{p.name}: node limit {opts.node_limit} reached", solution=res)
    return res
