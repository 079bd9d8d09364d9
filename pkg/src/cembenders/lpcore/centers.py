"""Interior points of polyhedra: Chebyshev center and analytic center."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ..errors import Infeasible
from .highs import solve_lp
from .problem import EQ, GE, LE, OPTIMAL, LPProblem, SolveOptions

_NORM_EPS = 1e-12


@dataclass
class CenterResult:
    x: np.ndarray
    radius: float
    slacks: np.ndarray  # one per inequality row of ``G x <= h``
    norms: np.ndarray  # ball-direction norm of each inequality row
    G: sp.csr_matrix
    h: np.ndarray
    iterations: int = 0

    def min_scaled_slack(self) -> float:
        mask = self.norms > _NORM_EPS
        if not mask.any():
            return np.inf
        return float((self.slacks[mask] / self.norms[mask]).min())


def _split(region: LPProblem, fixed: dict[int, float] | None):
    """Return (G, h, E, e, lb, ub) with every inequality written as G x <= h.

    Finite column bounds become explicit inequality rows; pinned columns and
    columns with lb == ub become equality rows.
    """
    A = region.A.tocsr()
    s = region.senses
    le, ge, eq = np.flatnonzero(s == LE), np.flatnonzero(s == GE), np.flatnonzero(s == EQ)
    n = region.num_cols
    lb, ub = region.lb.copy(), region.ub.copy()
    fixed = dict(fixed or {})
    for j in np.flatnonzero(lb == ub):
        fixed.setdefault(int(j), float(lb[j]))
    pins = sorted(fixed)
    for j in pins:
        lb[j] = -np.inf
        ub[j] = np.inf
    eye = sp.identity(n, format="csr")
    lo_cols = np.flatnonzero(np.isfinite(lb))
    up_cols = np.flatnonzero(np.isfinite(ub))
    G = sp.vstack([A[le], -A[ge], -eye[lo_cols], eye[up_cols]], format="csr")
    h = np.concatenate([region.rhs[le], -region.rhs[ge], -lb[lo_cols], ub[up_cols]])
    E = sp.vstack([A[eq], eye[pins]], format="csr") if (eq.size or pins) else sp.csr_matrix((0, n))
    e = np.concatenate([region.rhs[eq], np.array([fixed[j] for j in pins], dtype=float)])
    return G, h, E, e


def _canonical_order(G: sp.csr_matrix, h: np.ndarray) -> np.ndarray:
    keys = []
    for i in range(G.shape[0]):
        lo, hi = G.indptr[i], G.indptr[i + 1]
        keys.append((tuple(G.indices[lo:hi].tolist()), tuple(G.data[lo:hi].tolist()), float(h[i])))
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=int)


def _direction_basis(E: sp.csr_matrix, cols: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ball directions (restricted to ``cols``) that keep E x fixed."""
    if E.shape[0] == 0:
        return np.eye(cols.size)
    Ej = E[:, cols].toarray() * scale[None, :]
    return la.null_space(Ej, rcond=1e-10)


def chebyshev_center(
    region: LPProblem,
    fixed: dict[int, float] | None = None,
    *,
    ball_cols=None,
    col_scale=None,
    radius_cap: float = 1e6,
    opts: SolveOptions | None = None,
) -> CenterResult:
    """Center of the largest ball inscribed in ``region``.

    ``region`` supplies rows, senses and column bounds; its objective is
    ignored.  ``fixed`` pins columns before centering.  The ball lives in the
    affine hull of the equality rows and only moves the columns in
    ``ball_cols`` (default: all), measured in units of ``col_scale``.  Every
    inequality ends with slack at least ``radius * norms[i]``; a zero radius
    means the region is flat and the returned point is merely feasible.
    Raises :class:`Infeasible` for an empty region.
    """
    n = region.num_cols
    G, h, E, e = _split(region, fixed)
    order = _canonical_order(G, h)
    G, h = G[order], h[order]
    cols = np.arange(n) if ball_cols is None else np.asarray(ball_cols, dtype=int)
    scale = np.ones(cols.size) if col_scale is None else np.asarray(col_scale, dtype=float)
    N = _direction_basis(E, cols, scale)
    if N.shape[1]:
        proj = (G[:, cols].toarray() * scale[None, :]) @ N
        norms = np.linalg.norm(proj, axis=1)
    else:
        norms = np.zeros(G.shape[0])
    norms[norms < _NORM_EPS] = 0.0

    m_in = G.shape[0]
    A = sp.bmat([[G, sp.csr_matrix(norms.reshape(-1, 1))],
                 [E, sp.csr_matrix((E.shape[0], 1))]], format="csr")
    senses = np.array([LE] * m_in + [EQ] * E.shape[0])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    lb = np.concatenate([np.full(n, -np.inf), [0.0]])
    ub = np.concatenate([np.full(n, np.inf), [radius_cap]])
    lp = LPProblem(A, senses, np.concatenate([h, e]), c, lb, ub, name="chebyshev")
    sol = solve_lp(lp, opts)
    if sol.status != OPTIMAL:
        raise Infeasible(f"chebyshev center: region is {sol.status}")
    x = sol.x[:n]
    r = max(float(sol.x[n]), 0.0)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    slacks = h - G @ x
    return CenterResult(x, r, slacks[inv], norms[inv], G[inv], h[inv],
                        iterations=sol.iterations)


def analytic_center(
    region: LPProblem,
    fixed: dict[int, float] | None = None,
    *,
    tol: float = 1e-8,
    max_steps: int = 100,
    opts: SolveOptions | None = None,
) -> CenterResult:
    """Maximiser of the sum of log-slacks over ``region`` by damped Newton.

    Starts from the Chebyshev center; if that has zero radius the region has
    no interior and the Chebyshev point is returned unchanged.  Rows whose
    slack cannot vary inside the affine hull are left out of the barrier.
    """
    start = chebyshev_center(region, fixed, opts=opts)
    if start.radius <= 0.0:
        return start
    n = region.num_cols
    G, h = start.G, start.h
    _, _, E, _ = _split(region, fixed)
    N = _direction_basis(E, np.arange(n), np.ones(n))
    active = start.norms > _NORM_EPS
    Ga = G[active]
    ha = h[active]
    GN = Ga @ N
    x = start.x.copy()
    steps = 0
    for steps in range(1, max_steps + 1):
        s = ha - Ga @ x
        w = 1.0 / s
        grad = GN.T @ w
        H = GN.T @ (GN * (w * w)[:, None])
        try:
            dv = -np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            dv = -np.linalg.lstsq(H, grad, rcond=None)[0]
        dec2 = float(-grad @ dv)
        dx = N @ dv
        if dec2 / 2.0 <= tol:
            # Inside the quadratic-convergence region a full step is safe.
            if np.all(ha - Ga @ (x + dx) > 0):
                x = x + dx
            break
        ds = -(Ga @ dx)
        t = 1.0
        neg = ds < 0
        if neg.any():
            t = min(1.0, 0.99 * float((s[neg] / -ds[neg]).min()))
        f0 = -np.log(s).sum()
        while t > 1e-12:
            s_new = s + t * ds
            if np.all(s_new > 0) and -np.log(s_new).sum() <= f0 - 0.25 * t * dec2:
                break
            t *= 0.5
        x = x + t * dx
    slacks = h - G @ x
    norms = start.norms
    mask = norms > _NORM_EPS
    r = float((slacks[mask] / norms[mask]).min()) if mask.any() else 0.0
    return CenterResult(x, max(r, 0.0), slacks, norms, G, h, iterations=steps)
