"""Level-set region and the three ways of picking a point from it."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from ..errors import BoundOrder, Infeasible, NumericalBreakdown
from ..lpcore import (
    LE, OPTIMAL, CenterResult, LPProblem, SolveOptions, analytic_center, chebyshev_center,
    solve_lp, solve_qp,
)

BOUND_TOL = 1e-6


def level_set_bound(L: float, U: float, alpha: float) -> float:
    """L + alpha (U - L)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    if U < L - BOUND_TOL * abs(L):
        raise BoundOrder(f"upper bound {U!r} is below lower bound {L!r}", L=L, U=U)
    if U == L:
        return float(L)
    return float(L + alpha * (U - L))


@dataclass(frozen=True)
class LevelSetProblem:
    """A region over columns (y, z, rest) plus the level row ``cost.x <= L_alpha``.

    ``region`` already carries the level row as its last row.  Distances and
    centering only involve the first ``ny + nz`` columns.
    """

    region: LPProblem
    ny: int
    nz: int
    L_alpha: float

    @property
    def dist_cols(self) -> np.ndarray:
        return np.arange(self.ny + self.nz)

    @property
    def level_row(self) -> int:
        return self.region.num_rows - 1

    def level_value(self, x: np.ndarray) -> float:
        return float((self.region.A[self.level_row] @ x).item())

    def split(self, x: np.ndarray):
        return x[: self.ny].copy(), x[self.ny: self.ny + self.nz].copy()


def level_set_problem(base: LPProblem, ny: int, nz: int, L_alpha: float,
                      cost: np.ndarray | None = None) -> LevelSetProblem:
    """Append the level row (``cost`` defaults to the base objective) to ``base``."""
    cost = base.c if cost is None else np.asarray(cost, float)
    row = sp.csr_matrix(cost.reshape(1, -1))
    region = base.with_changes(
        A=sp.vstack([base.A, row], format="csr"),
        senses=np.concatenate([base.senses, [LE]]),
        rhs=np.concatenate([base.rhs, [L_alpha]]),
        row_names=list(base.row_names) + ["level"] if base.row_names else None,
        integers=np.zeros(0, dtype=int),
    )
    return LevelSetProblem(region, ny, nz, float(L_alpha))


def _point(sol, what: str) -> np.ndarray:
    if sol.status != OPTIMAL:
        if sol.status == "infeasible":
            raise Infeasible(f"{what}: region is infeasible")
        raise NumericalBreakdown(f"{what}: solver returned {sol.status}")
    return sol.x


# Complementarity accepted for the projection.  Any point of the level set
# close to the projection serves as the next trial point; the bounds come
# from exact LP solves, so digits past this only cost solver retries.
PROJECTION_GAP_TOL = 1e-4


def regularize_l2(ls: LevelSetProblem, incumbent, opts: SolveOptions | None = None):
    """Euclidean projection of the incumbent (y*, z*) onto the level-set region."""
    v = np.concatenate([np.asarray(incumbent[0], float), np.asarray(incumbent[1], float)])
    n = ls.region.num_cols
    k = v.size
    diag = np.zeros(n)
    diag[:k] = 2.0
    c = np.zeros(n)
    c[:k] = -2.0 * v
    qp = ls.region.with_changes(Q=sp.diags(diag, format="csr"), c=c, offset=float(v @ v),
                                name="level-l2")
    opts = replace(opts or SolveOptions(), qp_gap_tol=PROJECTION_GAP_TOL)
    x = _point(solve_qp(qp, opts), "l2 projection")
    return ls.split(x)


def regularize_interior(ls: LevelSetProblem, fixed_integers: dict[int, float] | None = None,
                        *, center: str = "chebyshev", col_scale=None,
                        opts: SolveOptions | None = None):
    """Interior point of the level-set region.

    ``fixed_integers`` pins columns first; the ball then moves only the
    remaining (y, z) columns.  Returns (y, z, CenterResult).
    """
    fixed = dict(fixed_integers or {})
    if center == "analytic":
        res: CenterResult = analytic_center(ls.region, fixed, opts=opts)
    else:
        cols = np.array([j for j in ls.dist_cols if j not in fixed], dtype=int)
        scale = None if col_scale is None else np.asarray(col_scale, float)[cols]
        res = chebyshev_center(ls.region, fixed, ball_cols=cols, col_scale=scale, opts=opts)
    y, z = ls.split(res.x)
    return y, z, res


def variable_scale(lb: np.ndarray, ub: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Range where both bounds are finite, otherwise |v| + 1."""
    rng = ub - lb
    return np.where(np.isfinite(rng), np.maximum(rng, 0.0), np.abs(v) + 1.0)


def regularize_trust_region(planning: LPProblem, incumbent, widths: np.ndarray,
                            opts: SolveOptions | None = None):
    """Minimise the planning objective within |v - v*| <= widths around (y*, z*)."""
    v = np.concatenate([np.asarray(incumbent[0], float), np.asarray(incumbent[1], float)])
    k = v.size
    lb = planning.lb.copy()
    ub = planning.ub.copy()
    w = np.asarray(widths, float)
    lb[:k] = np.maximum(lb[:k], v - w)
    ub[:k] = np.minimum(ub[:k], v + w)
    # The incumbent is feasible for the planning rows, so a box around it
    # always meets the column bounds; guard against round-off crossings.
    lb[:k] = np.minimum(lb[:k], ub[:k])
    x = _point(solve_lp(planning.with_changes(lb=lb, ub=ub, integers=np.zeros(0, dtype=int),
                                              name="trust-region"), opts), "trust region")
    return x[:k][: len(incumbent[0])].copy(), x[len(incumbent[0]):k].copy()


def update_radius(radius: float, improved: bool, expand: float, shrink: float,
                  r_min: float, r_max: float) -> float:
    """Grow on improvement, shrink otherwise, then clip to [r_min, r_max]."""
    r = radius * (expand if improved else shrink)
    return float(min(max(r, r_min), r_max))
