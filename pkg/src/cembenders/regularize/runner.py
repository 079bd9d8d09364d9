"""Regularized loop and the two-stage mixed-integer procedure."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..benders import BendersConfig, RunResult, build_planning_problem, run_loop
from ..benders.loop import PlanSolve
from ..benders.master import MasterState
from ..errors import SpecInvalid
from ..instance import CEMInstance
from ..reformulate import BlockProblem, assemble_block_problem
from .level import (
    level_set_bound, level_set_problem, regularize_interior, regularize_l2,
    regularize_trust_region, update_radius, variable_scale,
)


def _incumbent(state: MasterState, plan: PlanSolve):
    if state.y_star is None:
        return plan.y, plan.z
    return state.y_star, state.z_star


class LevelSelector:
    """Next iterate from the level-set region, by projection or centering."""

    def __init__(self, bp: BlockProblem, cfg: BendersConfig, kind: str,
                 pin_integers: bool = False):
        self.bp, self.cfg, self.kind, self.pin = bp, cfg, kind, pin_integers

    def __call__(self, state: MasterState, plan: PlanSolve, k: int):
        cfg, bp = self.cfg, self.bp
        L_alpha = level_set_bound(state.L, state.U, cfg.alpha)
        fixed = None
        if self.pin:
            ints = bp.layout.integers
            fixed = {int(j): float(np.round(plan.y[j])) for j in ints}
            # With integers pinned the region must still hold the planning incumbent.
            L_alpha = max(L_alpha, plan.objective)
        base = build_planning_problem(state, bp, integrality=False)
        ls = level_set_problem(base, bp.num_y, bp.num_z, L_alpha)
        extra = {"L_alpha": L_alpha}
        if self.kind == "l2":
            y, z = regularize_l2(ls, _incumbent(state, plan), cfg.opts)
            x = self._full(ls, y, z, state)
        else:
            y, z, res = regularize_interior(ls, fixed, center=cfg.center, opts=cfg.opts)
            x = res.x
            extra["r_star"] = res.radius
            extra["min_scaled_slack"] = res.min_scaled_slack()
        extra["level_value"] = ls.level_value(x) if x is not None else None
        return y, z, extra

    def _full(self, ls, y, z, state):
        # theta at its smallest value consistent with the cuts.
        th = np.zeros(len(self.bp.blocks))
        for i, b in enumerate(self.bp.blocks):
            vals = [c.evaluate(y[b.y_cols], z[b.z_cols]) for c in state.cuts_for(b.w)]
            th[i] = max([0.0] + vals)
        return np.concatenate([y, z, th])


class TrustRegionSelector:
    """Next iterate from the planning problem boxed around the incumbent."""

    def __init__(self, bp: BlockProblem, cfg: BendersConfig):
        self.bp, self.cfg = bp, cfg
        self.radius = cfg.tr_radius
        self.last_U = np.inf

    def __call__(self, state: MasterState, plan: PlanSolve, k: int):
        cfg, bp = self.cfg, self.bp
        if k > 0:
            self.radius = update_radius(self.radius, state.U < self.last_U, cfg.tr_expand,
                                        cfg.tr_shrink, cfg.tr_min, cfg.tr_max)
        self.last_U = state.U
        y0, z0 = _incumbent(state, plan)
        lay = bp.layout
        lb = np.concatenate([lay.y_lb, lay.z_lb])
        ub = np.concatenate([lay.y_ub, lay.z_ub])
        widths = self.radius * variable_scale(lb, ub, np.concatenate([y0, z0]))
        base = build_planning_problem(state, bp, integrality=False)
        y, z = regularize_trust_region(base, (y0, z0), widths, cfg.opts)
        return y, z, {"tr_radius": self.radius}


def selector_for(bp: BlockProblem, cfg: BendersConfig, kind: str, pin_integers: bool = False):
    if kind == "trust-region":
        return TrustRegionSelector(bp, cfg)
    return LevelSelector(bp, cfg, kind, pin_integers)


def run_regularized(inst: CEMInstance | BlockProblem, cfg: BendersConfig) -> RunResult:
    """The loop with the next iterate drawn from the configured criterion."""
    if cfg.kind == "none":
        raise SpecInvalid("run_regularized needs kind l2, interior or trust-region", field="kind")
    bp = inst if isinstance(inst, BlockProblem) else assemble_block_problem(inst)
    return run_loop(bp, cfg, selector=selector_for(bp, cfg, cfg.kind))


def _is_integral(y: np.ndarray | None, ints: np.ndarray, tol: float) -> bool:
    return y is not None and bool(np.all(np.abs(y[ints] - np.round(y[ints])) <= tol))


def run_two_stage(inst: CEMInstance | BlockProblem, cfg: BendersConfig | None = None,
                  *, stage2_only: bool = False) -> RunResult:
    """Interior-regularized relaxation first, then the loop with a planning MILP.

    Stage 2 keeps every Stage-1 cut.  Its first iterate is the raw planning
    MILP solution; later iterates pin the integer columns to the MILP values
    and center the rest.  ``stage2_only`` skips Stage 1 (ablation).
    """
    cfg = replace(cfg or BendersConfig(), kind="interior")
    bp = inst if isinstance(inst, BlockProblem) else assemble_block_problem(inst)
    ints = bp.layout.integers
    state = MasterState()
    if not stage2_only:
        stage1 = run_loop(bp, cfg, selector=selector_for(bp, cfg, "interior"), state=state)
        remaining = cfg.max_iter - stage1.iterations
        if not _is_integral(state.y_star, ints, cfg.opts.integrality_tol):
            # The relaxation's incumbent is not a valid upper bound for the integer problem.
            state.U = np.inf
            state.y_star = state.z_star = None
        if not stage1.converged or remaining < 1:
            stage1.stage_boundary = None
            return stage1
    else:
        remaining = cfg.max_iter
    boundary = len(state.trace)
    cfg2 = replace(cfg, max_iter=remaining)
    res = run_loop(bp, cfg2, selector=selector_for(bp, cfg2, "interior", pin_integers=True),
                   state=state, integrality=True, stage=2)
    res.config = cfg
    res.stage_boundary = boundary
    return res


def stage_iterations(res: RunResult, stage: int) -> int:
    return sum(1 for r in res.trace if r.stage == stage)
