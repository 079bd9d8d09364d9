"""Operational sub-problem of one sub-period with the planning decisions fixed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import CEMError, SubproblemError
from ..lpcore import EQ, LPProblem, SolveOptions, solve_lp
from ..reformulate import OperationalBlock

# Duals below this magnitude are round-off; leaving them in the cut rows
# gives the planning LP coefficient ranges its presolve mishandles.
DUAL_ZERO = 1e-11


@dataclass(frozen=True)
class SubResult:
    w: int
    value: float  # g_w
    pi: np.ndarray  # sensitivity of g_w to the period's planning vector
    lam: np.ndarray  # sensitivity of g_w to the sub-period's boundary vector
    x: np.ndarray


def subproblem_lp(block: OperationalBlock, y_p: np.ndarray, z_w: np.ndarray) -> LPProblem:
    """Columns (x, y_p, z_w); the operational rows followed by one fixing row per y and z entry."""
    nx, ny, nz = block.num_x, block.y_cols.size, block.z_cols.size
    top = sp.hstack([block.A.csr, block.B.csr, block.Q.csr], format="csr")
    fix = sp.hstack([sp.csr_matrix((ny + nz, nx)), sp.identity(ny + nz)], format="csr")
    return LPProblem(
        A=sp.vstack([top, fix], format="csr"),
        senses=np.concatenate([block.senses, np.full(ny + nz, EQ)]),
        rhs=np.concatenate([block.b, np.asarray(y_p, float), np.asarray(z_w, float)]),
        c=np.concatenate([block.c, np.zeros(ny + nz)]),
        lb=np.concatenate([block.x_lb, np.full(ny + nz, -np.inf)]),
        ub=np.concatenate([block.x_ub, np.full(ny + nz, np.inf)]),
        col_names=list(block.x_names) + [f"y{j}" for j in block.y_cols]
        + [f"z{j}" for j in block.z_cols],
        row_names=list(block.row_names) + [f"fix_y{j}" for j in block.y_cols]
        + [f"fix_z{j}" for j in block.z_cols],
        name=f"sub_w{block.w}",
    )


def solve_subproblem(block: OperationalBlock, y_p, z_w, opts: SolveOptions | None = None) -> SubResult:
    """Value and fixing-row duals of the sub-problem at (y_p, z_w).

    Always feasible by slack construction; anything other than an optimal
    status, or any solver exception, is reported as :class:`SubproblemError`.
    """
    y_p = np.asarray(y_p, float)
    z_w = np.asarray(z_w, float)
    if y_p.shape != (block.y_cols.size,) or z_w.shape != (block.z_cols.size,):
        raise SubproblemError(
            f"sub-period {block.w}: expected y of length {block.y_cols.size} and z of length "
            f"{block.z_cols.size}", subperiod=block.w)
    try:
        lp = subproblem_lp(block, y_p, z_w)
        bad = [name for name, arr in (("matrix", lp.A.data), ("rhs", lp.rhs), ("cost", lp.c))
               if not np.all(np.isfinite(arr))]
        if bad:
            raise ValueError(f"non-finite {', '.join(bad)} data")
        sol = solve_lp(lp, opts)
    except (CEMError, ValueError, FloatingPointError) as exc:
        raise SubproblemError(f"sub-period {block.w}: {exc}", subperiod=block.w) from exc
    if not sol.optimal:
        raise SubproblemError(f"sub-period {block.w}: solver status {sol.status}",
                              subperiod=block.w, status=sol.status)
    m, nx, ny = block.senses.size, block.num_x, block.y_cols.size
    duals = np.where(np.abs(sol.duals) < DUAL_ZERO, 0.0, sol.duals)
    return SubResult(
        w=block.w,
        value=float(sol.objective),
        pi=duals[m:m + ny].copy(),
        lam=duals[m + ny:].copy(),
        x=sol.x[:nx].copy(),
    )
