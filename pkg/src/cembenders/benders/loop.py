"""The decomposition loop.

One control loop: solve every sub-problem at the current iterate, update the
upper bound, add the cuts, re-solve the planning problem for the lower
bound, stop on the relative gap, otherwise pick the next iterate.  Picking
the next iterate is delegated to a selector so the regularized variants
reuse the loop unchanged.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..errors import Infeasible, NumericalBreakdown, SpecInvalid
from ..instance import CEMInstance
from ..lpcore import INFEASIBLE, OPTIMAL, PrimalDualSolution, SolveOptions, solve_lp, solve_milp
from .. import parallel
from ..reformulate import BlockProblem, assemble_block_problem
from .master import (
    Cut, MasterState, TraceRow, build_planning_problem, compute_upper_bound, planning_space,
)

KINDS = ("none", "l2", "interior", "trust-region")
CONVERGED = "converged"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class BendersConfig:
    max_iter: int = 200
    tol: float = 1e-3
    kind: str = "none"
    alpha: float = 0.5
    center: str = "chebyshev"  # interior criterion: "chebyshev" or "analytic"
    tr_radius: float = 0.2  # initial trust-region width, fraction of each variable's scale
    tr_expand: float = 2.0
    tr_shrink: float = 0.5
    tr_min: float = 1e-4
    tr_max: float = 1.0
    workers: int | None = None
    backend: str = "thread"
    seed: int = 0
    opts: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecInvalid(f"kind must be one of {KINDS}, got {self.kind!r}", field="kind")
        if not 0.0 < self.alpha < 1.0:
            raise SpecInvalid(f"alpha must lie in the open interval (0, 1), got {self.alpha}",
                              field="alpha")
        if not self.tol > 0.0:
            raise SpecInvalid(f"tol must be positive, got {self.tol}", field="tol")
        if self.max_iter < 1:
            raise SpecInvalid(f"max_iter must be at least 1, got {self.max_iter}", field="max_iter")
        if self.center not in ("chebyshev", "analytic"):
            raise SpecInvalid(f"center must be chebyshev or analytic, got {self.center!r}",
                              field="center")
        if not (0 < self.tr_min <= self.tr_max and self.tr_expand >= 1.0
                and 0 < self.tr_shrink <= 1.0 and self.tr_radius >= 0):
            raise SpecInvalid("trust-region parameters out of range", field="tr")

    def echo(self) -> dict:
        d = asdict(self)
        d["opts"] = asdict(self.opts)
        return d


@dataclass
class RunResult:
    status: str
    objective: float  # best upper bound
    lower: float
    gap: float
    y: np.ndarray
    z: np.ndarray
    trace: list[TraceRow]
    wall_ms: list[float]
    state: MasterState
    bp: BlockProblem
    config: BendersConfig
    stage_boundary: int | None = None  # trace index of the first Stage-2 row

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.trace)


@dataclass
class PlanSolve:
    """Planning-problem output seen by a selector."""

    y: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    objective: float  # incumbent value
    bound: float  # proven lower bound (equals objective for LPs)
    gap: float  # MIP gap achieved, 0 for LPs
    solution: PrimalDualSolution


# selector(state, plan, k) -> (y, z, extra trace fields)
Selector = Callable[[MasterState, PlanSolve, int], tuple[np.ndarray, np.ndarray, dict]]


def solve_planning(state: MasterState, bp: BlockProblem, integrality: bool,
                   opts: SolveOptions) -> PlanSolve:
    prob = build_planning_problem(state, bp, integrality)
    space = planning_space(bp)
    if integrality and prob.is_mip:
        sol = solve_milp(prob, opts)
        bound, gap = sol.bound, sol.gap
    else:
        sol = solve_lp(prob.relaxed(), opts)
        bound, gap = sol.objective, 0.0
    if sol.status == INFEASIBLE:
        raise Infeasible("planning problem is infeasible")
    if sol.status != OPTIMAL and not np.all(np.isfinite(sol.x)):
        raise NumericalBreakdown(f"planning problem returned {sol.status}")
    y, z, th = space.split(sol.x)
    return PlanSolve(y.copy(), z.copy(), th.copy(), float(sol.objective), float(bound),
                     float(gap), sol)


def planning_selector(state: MasterState, plan: PlanSolve, k: int):
    return plan.y, plan.z, {}


def evaluate(bp: BlockProblem, y: np.ndarray, z: np.ndarray, cfg: BendersConfig):
    # Resolved at call time: the pool module imports the sub-problem solver from this package.
    items = tuple(parallel.WorkItem(b.w, b, y[b.y_cols], z[b.z_cols]) for b in bp.blocks)
    batch = parallel.WorkBatch(items, workers=parallel.resolve_workers(cfg.workers),
                               seed=cfg.seed, backend=cfg.backend, opts=cfg.opts)
    return parallel.map_subproblems(batch)


def run_loop(bp: BlockProblem, cfg: BendersConfig, *, selector: Selector = planning_selector,
             state: MasterState | None = None, start: tuple[np.ndarray, np.ndarray] | None = None,
             integrality: bool = False, stage: int = 1, kind: str | None = None) -> RunResult:
    """Run the loop from ``start`` (default: the cut-free planning solution)."""
    kind = kind or cfg.kind
    state = state or MasterState()
    if start is None:
        plan0 = solve_planning(state, bp, integrality, cfg.opts)
        state.update_lower(plan0.bound)
        y, z = plan0.y, plan0.z
    else:
        y, z = (np.asarray(v, float) for v in start)
    blocks = {b.w: b for b in bp.blocks}
    status = MAX_ITER
    for k in range(cfg.max_iter):
        t0 = time.perf_counter()
        results = evaluate(bp, y, z, cfg)
        values = {r.w: r.value for r in results}
        state.add_cuts(Cut(r.w, state.k, r.value, r.pi, r.lam,
                           y[blocks[r.w].y_cols].copy(), z[blocks[r.w].z_cols].copy())
                       for r in results)
        compute_upper_bound(state, (y, z), values, bp)
        plan = solve_planning(state, bp, integrality, cfg.opts)
        state.update_lower(plan.bound)
        row = TraceRow(state.k, state.U, state.L, state.gap, len(state.cuts), kind=kind,
                       alpha=cfg.alpha if kind != "none" else None, stage=stage)
        # A planning MILP solved to a nonzero gap cannot certify a tighter gap.
        done = state.gap <= max(cfg.tol, plan.gap)
        if not done:
            y, z, extra = selector(state, plan, k)
            for key, val in extra.items():
                setattr(row, key, val)
        state.trace.append(row)
        state.wall_ms.append((time.perf_counter() - t0) * 1e3)
        state.k += 1
        if done:
            status = CONVERGED
            break
    y_star = state.y_star if state.y_star is not None else y
    z_star = state.z_star if state.z_star is not None else z
    return RunResult(status, state.U, state.L, state.gap, y_star, z_star, state.trace,
                     state.wall_ms, state, bp, cfg)


def run_benders(inst: CEMInstance | BlockProblem, cfg: BendersConfig | None = None) -> RunResult:
    """Unregularized decomposition on the continuous relaxation (kind must be ``none``)."""
    cfg = cfg or BendersConfig()
    if cfg.kind != "none":
        raise SpecInvalid("run_benders handles kind='none'; use run_regularized", field="kind")
    bp = inst if isinstance(inst, BlockProblem) else assemble_block_problem(inst)
    return run_loop(bp, cfg)
