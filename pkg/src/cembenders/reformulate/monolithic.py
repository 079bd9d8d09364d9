"""Single flat problems used as the ground-truth oracle.

``decomposed`` stacks a :class:`BlockProblem` into one matrix with column
order (y, z, x_w for each sub-period).  ``chained`` is built independently
of the boundary split and of the budgeting variables: multi-day storage
hour-0 rows refer directly to the previous sub-period's last-hour level, and
each policy is one aggregate row per (period, scenario).  Both carry the
same penalized slacks, so their optimal values agree.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..instance.model import CLEAN_KINDS, CO2_CAP, MDS_KINDS, CEMInstance
from ..lpcore.problem import LE, LPProblem
from .blocks import (
    CHAINED, DECOMPOSED, BlockProblem, _policies_for, assemble_block_problem,
    build_coupling_blocks, build_operational_block, planning_layout, policy_budget,
)


class _Stack:
    def __init__(self):
        self.r, self.c, self.v = [], [], []
        self.senses, self.rhs, self.names = [], [], []

    @property
    def m(self) -> int:
        return len(self.senses)

    def put(self, M: sp.spmatrix, row0: int, col_map: np.ndarray) -> None:
        coo = M.tocoo()
        self.r.extend((coo.row + row0).tolist())
        self.c.extend(col_map[coo.col].tolist())
        self.v.extend(coo.data.tolist())

    def rows(self, senses, rhs, names) -> int:
        row0 = self.m
        self.senses.extend(senses)
        self.rhs.extend(rhs)
        self.names.extend(names)
        return row0

    def coef(self, i: int, j: int, a: float) -> None:
        self.r.append(i)
        self.c.append(j)
        self.v.append(float(a))

    def add(self, name, sense, rhs, terms) -> int:
        i = self.rows([sense], [rhs], [name])
        for j, a in terms:
            self.coef(i, j, a)
        return i

    def matrix(self, n: int) -> sp.csr_matrix:
        A = sp.coo_matrix((self.v, (self.r, self.c)), shape=(self.m, n)).tocsr()
        A.sum_duplicates()
        A.eliminate_zeros()
        return A


def stack_blocks(bp: BlockProblem) -> LPProblem:
    """The decomposed monolithic problem, built from an assembled BlockProblem."""
    lay = bp.layout
    ny, nz = bp.num_y, bp.num_z
    names = list(lay.y_names) + list(lay.z_names)
    lb = [lay.y_lb, lay.z_lb]
    ub = [lay.y_ub, lay.z_ub]
    cost = [lay.f, np.zeros(nz)]
    st = _Stack()
    pr = bp.planning
    row0 = st.rows(pr.senses.tolist(), pr.rhs.tolist(), list(pr.names))
    st.put(pr.Y.csr, row0, np.arange(ny))
    st.put(pr.Z.csr, row0, ny + np.arange(nz))
    off = ny + nz
    for b in bp.blocks:
        row0 = st.rows(b.senses.tolist(), b.b.tolist(), list(b.row_names))
        st.put(b.A.csr, row0, off + np.arange(b.num_x))
        st.put(b.B.csr, row0, b.y_cols)
        st.put(b.Q.csr, row0, ny + b.z_cols)
        names.extend(b.x_names)
        lb.append(b.x_lb)
        ub.append(b.x_ub)
        cost.append(b.weight * b.c)
        off += b.num_x
    return LPProblem(
        A=st.matrix(off), senses=np.array(st.senses), rhs=np.array(st.rhs),
        c=np.concatenate(cost), lb=np.concatenate(lb), ub=np.concatenate(ub),
        col_names=names, row_names=st.names, integers=lay.integers.copy(),
        name=f"{bp.name}-decomposed",
    )


def _chained(inst: CEMInstance) -> LPProblem:
    lay = planning_layout(inst)
    pr = build_coupling_blocks(inst, lay)
    ny = len(lay.y_keys)
    names = list(lay.y_names)
    lb, ub, cost = [lay.y_lb], [lay.y_ub], [lay.f]
    st = _Stack()
    mp = pr.select("multiperiod")
    Ymp = pr.Y.csr[mp]
    row0 = st.rows(pr.senses[mp].tolist(), pr.rhs[mp].tolist(), [pr.names[i] for i in mp])
    st.put(Ymp, row0, np.arange(ny))

    blocks = {}
    first_row = {}  # (w, g) -> index of the hour-0 state row
    off = ny
    for p in inst.periods:
        for w in sorted(p.subperiods, key=lambda w: w.id):
            b = build_operational_block(inst, w.id, lay, mode=CHAINED)
            row0 = st.rows(b.senses.tolist(), b.b.tolist(), list(b.row_names))
            st.put(b.A.csr, row0, off + np.arange(b.num_x))
            st.put(b.B.csr, row0, b.y_cols)
            for r in inst.resources:
                if r.kind in MDS_KINDS:
                    first_row[(w.id, r.id)] = row0 + b.row_names.index(f"w{w.id}_soc_{r.id}_0")
            blocks[w.id] = (b, off)
            names.extend(b.x_names)
            lb.append(b.x_lb)
            ub.append(b.x_ub)
            cost.append(b.weight * b.c)
            off += b.num_x

    extra_names, extra_cost = [], []

    def new_col(name, c=0.0):
        nonlocal off
        extra_names.append(name)
        extra_cost.append(c)
        off += 1
        return off - 1

    def col(w_id, sym, ent, t=None):
        b, o = blocks[w_id]
        return o + b.catalog[(sym, ent, t)]

    mds = [r for r in inst.resources if r.kind in MDS_KINDS]
    for p in inst.periods:
        for s in inst.scenarios:
            ws = sorted(w.id for w in p.subperiods_of(s.id))
            if not ws:
                continue
            for r in mds:
                cap = lay.y_index[("cap", r.id, p.id)]
                H = inst.subperiod(ws[0]).hours
                for k, wid in enumerate(ws):
                    row = first_row[(wid, r.id)]
                    keep = 1.0 - r.eta_self
                    if k == 0 and not inst.mds_wrap:
                        j = new_col(f"w{wid}_x_init_{r.id}")
                        st.coef(row, j, -keep)
                        st.add(f"w{wid}_initlim_{r.id}", LE, 0.0, [(j, 1.0), (cap, -r.energy_ratio)])
                        continue
                    pred = ws[k - 1]
                    level = [(col(pred, "x_soc", r.id, H - 1), 1.0),
                             (col(pred, "s_mds_pos", r.id), 1.0),
                             (col(pred, "s_mds_neg", r.id), -1.0)]
                    for j, a in level:
                        st.coef(row, j, -keep * a)
                    st.add(f"w{pred}_levelhi_{r.id}", LE, 0.0, level + [(cap, -r.energy_ratio)])
                    st.add(f"w{pred}_levello_{r.id}", LE, 0.0, [(j, -a) for j, a in level])
            for q in _policies_for(inst, p.id, s.id):
                b0 = blocks[ws[0]][0]
                slack = new_col(f"p{p.id}_{s.id}_s_policy_{q.id}",
                                b0.weight * p.variable_cost_factor * q.penalty)
                H = inst.subperiod(ws[0]).hours
                budget = policy_budget(inst, q, p.id, s.id)
                if q.kind == CO2_CAP:
                    terms = [(col(wid, "x_d", r.id, t), r.co2_rate) for wid in ws
                             for r in inst.resources if r.co2_rate > 0 for t in range(H)]
                    st.add(f"p{p.id}_{s.id}_policy_{q.id}", LE, budget, terms + [(slack, -1.0)])
                else:
                    terms = [(col(wid, "x_d", r.id, t), -1.0) for wid in ws
                             for r in inst.resources if r.kind in CLEAN_KINDS for t in range(H)]
                    st.add(f"p{p.id}_{s.id}_policy_{q.id}", LE, -budget, terms + [(slack, -1.0)])

    n = off
    k = len(extra_names)
    return LPProblem(
        A=st.matrix(n), senses=np.array(st.senses), rhs=np.array(st.rhs),
        c=np.concatenate(cost + [np.array(extra_cost)]),
        lb=np.concatenate(lb + [np.zeros(k)]), ub=np.concatenate(ub + [np.full(k, np.inf)]),
        col_names=names + extra_names, row_names=st.names, integers=lay.integers.copy(),
        name=f"{inst.name}-chained",
    )


def assemble_monolithic(inst: CEMInstance, coupling: str = DECOMPOSED) -> LPProblem:
    """Flat problem; carries the integer column set when the instance has one."""
    if coupling == DECOMPOSED:
        return stack_blocks(assemble_block_problem(inst))
    if coupling == CHAINED:
        return _chained(inst)
    raise ValueError(f"coupling must be {DECOMPOSED!r} or {CHAINED!r}, got {coupling!r}")
