"""Cuts, the planning problem and bound bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..lpcore import GE, LPProblem, relative_gap
from ..reformulate import BlockProblem


@dataclass(frozen=True)
class Cut:
    """theta_w >= value + pi.(y_p - y_anchor) + lam.(z_w - z_anchor)."""

    w: int
    iteration: int
    value: float
    pi: np.ndarray
    lam: np.ndarray
    y_anchor: np.ndarray
    z_anchor: np.ndarray

    @property
    def constant(self) -> float:
        return float(self.value - self.pi @ self.y_anchor - self.lam @ self.z_anchor)

    def evaluate(self, y_p, z_w) -> float:
        return float(self.value + self.pi @ (np.asarray(y_p) - self.y_anchor)
                     + self.lam @ (np.asarray(z_w) - self.z_anchor))


@dataclass
class TraceRow:
    iteration: int
    U: float
    L: float
    gap: float
    n_cuts: int
    kind: str = "none"
    alpha: float | None = None
    L_alpha: float | None = None
    r_star: float | None = None
    stage: int = 1
    tr_radius: float | None = None
    # Diagnostics kept off the CSV: the iterate's level-row value and its
    # smallest slack-to-norm ratio in the centering region.
    level_value: float | None = None
    min_scaled_slack: float | None = None


@dataclass
class MasterState:
    cuts: list[Cut] = field(default_factory=list)
    U: float = np.inf
    L: float = -np.inf
    y_star: np.ndarray | None = None
    z_star: np.ndarray | None = None
    k: int = 0
    trace: list[TraceRow] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)

    def cuts_for(self, w: int) -> list[Cut]:
        return [c for c in self.cuts if c.w == w]

    @property
    def gap(self) -> float:
        return relative_gap(self.U, self.L)

    def add_cuts(self, cuts) -> None:
        self.cuts.extend(cuts)

    def update_lower(self, value: float) -> None:
        # The cut pool only grows, so a lower value can only be solver noise.
        self.L = max(self.L, float(value))


def candidate_cost(bp: BlockProblem, y: np.ndarray, values: dict[int, float]) -> float:
    """f.y + sum of probability-weighted sub-problem values."""
    return float(bp.layout.f @ y + sum(b.weight * values[b.w] for b in bp.blocks))


def compute_upper_bound(state: MasterState, iterate: tuple[np.ndarray, np.ndarray],
                        sub_values: dict[int, float], bp: BlockProblem) -> float:
    """Update U and the incumbent; on an exact tie the earlier incumbent stays."""
    y, z = iterate
    cand = candidate_cost(bp, y, sub_values)
    if cand < state.U:
        state.U = cand
        state.y_star = np.array(y, float)
        state.z_star = np.array(z, float)
    return state.U


@dataclass(frozen=True)
class PlanningSpace:
    """Column layout of the planning problem: (y, z, theta_w per block)."""

    ny: int
    nz: int
    nw: int
    w_ids: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.ny + self.nz + self.nw

    def theta(self, w: int) -> int:
        return self.ny + self.nz + self.w_ids.index(w)

    def split(self, v: np.ndarray):
        return v[: self.ny], v[self.ny: self.ny + self.nz], v[self.ny + self.nz:]


def planning_space(bp: BlockProblem) -> PlanningSpace:
    return PlanningSpace(bp.num_y, bp.num_z, len(bp.blocks), tuple(b.w for b in bp.blocks))


def build_planning_problem(state: MasterState, bp: BlockProblem, integrality: bool = False) -> LPProblem:
    """Planning problem over (y, z, theta).

    Rows: every cut, then multi-period, linking and coupling rows.  Each
    theta_w is bounded below by 0, which all operational costs satisfy.
    """
    sp_ = planning_space(bp)
    lay = bp.layout
    blocks = {b.w: b for b in bp.blocks}
    r, c, v, rhs, names = [], [], [], [], []
    for i, cut in enumerate(state.cuts):
        b = blocks[cut.w]
        terms = [(sp_.theta(cut.w), 1.0)]
        terms += [(int(j), -float(a)) for j, a in zip(b.y_cols, cut.pi) if a != 0.0]
        terms += [(sp_.ny + int(j), -float(a)) for j, a in zip(b.z_cols, cut.lam) if a != 0.0]
        for j, a in terms:
            r.append(i)
            c.append(j)
            v.append(a)
        rhs.append(cut.constant)
        names.append(f"cut_w{cut.w}_k{cut.iteration}")
    nc = len(state.cuts)
    C = sp.csr_matrix((v, (r, c)), shape=(nc, sp_.n))
    pr = bp.planning
    P = sp.hstack([pr.Y.csr, pr.Z.csr, sp.csr_matrix((pr.Y.rows, sp_.nw))], format="csr")
    obj = np.concatenate([lay.f, np.zeros(sp_.nz), [b.weight for b in bp.blocks]])
    return LPProblem(
        A=sp.vstack([C, P], format="csr"),
        senses=np.concatenate([np.full(nc, GE), pr.senses]),
        rhs=np.concatenate([np.array(rhs, float), pr.rhs]),
        c=obj,
        lb=np.concatenate([lay.y_lb, lay.z_lb, np.zeros(sp_.nw)]),
        ub=np.concatenate([lay.y_ub, lay.z_ub, np.full(sp_.nw, np.inf)]),
        col_names=list(lay.y_names) + list(lay.z_names) + [f"theta_w{w}" for w in sp_.w_ids],
        row_names=names + list(pr.names),
        integers=lay.integers.copy() if integrality else np.zeros(0, dtype=int),
        name="planning",
    )
