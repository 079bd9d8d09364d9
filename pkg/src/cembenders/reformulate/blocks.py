"""Block-structured assembly.

Column spaces
-------------
``y``  planning variables, grouped by period: ``cap``, ``new``, ``ret`` per
       resource and ``tcap``, ``tnew`` per link.  ``new``/``ret`` count units of
       ``unit_size_mw``.
``z``  sub-period boundary variables, grouped by sub-period: ``z_start`` and
       ``z_end`` per multi-day storage resource, ``z_b`` per policy in scope.
``x``  operational variables, local to one sub-period.

Operational rows of a sub-period, in this order:

1. zonal balance, one per zone-hour (equality, non-served energy column)
2. capacity and availability rows, per entity and row kind, hour by hour
3. unit-commitment startup rows (cyclic)
4. ramp rows (cyclic), up then down
5. short-storage state rows, cyclic: hour 0 refers to the last hour
6. multi-day storage state rows: hour 0 refers to ``z_start``; one extra row
   ties ``z_end`` to the last-hour level through a penalized slack pair
7. budgeted policy rows, one per policy in scope

Inside a sub-period, columns are sorted by (semantic name, entity, hour).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..instance.model import (
    CLEAN_KINDS, CO2_CAP, HYDRO, MDS_KINDS, MDS_STORAGE, MIN_SHARE, SHORT_STORAGE, THERMAL,
    VRE, CEMInstance, SubPeriod,
)
from ..lpcore.problem import EQ, LE

DECOMPOSED = "decomposed"
CHAINED = "chained"


@dataclass(frozen=True)
class SparseBlock:
    """Coordinate-list matrix with row-major entry order and no zeros or duplicates."""

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    @classmethod
    def from_coo(cls, rows: int, cols: int, r, c, v) -> "SparseBlock":
        m = sp.coo_matrix((np.asarray(v, float), (np.asarray(r, int), np.asarray(c, int))),
                          shape=(rows, cols)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        coo = m.tocoo()
        return cls(rows, cols, coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy())

    @classmethod
    def from_matrix(cls, m) -> "SparseBlock":
        coo = sp.coo_matrix(m)
        return cls.from_coo(m.shape[0], m.shape[1], coo.row, coo.col, coo.data)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.row_idx, self.col_idx)), shape=(self.rows, self.cols))

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def entries(self) -> list[tuple[int, int, float]]:
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()))

    def __hash__(self):
        return hash((self.rows, self.cols, self.row_idx.tobytes(), self.col_idx.tobytes(),
                     self.values.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, SparseBlock) and self.rows == other.rows
                and self.cols == other.cols
                and np.array_equal(self.row_idx, other.row_idx)
                and np.array_equal(self.col_idx, other.col_idx)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class PlanningLayout:
    """Column catalogs of the y and z spaces."""

    y_names: tuple[str, ...]
    y_keys: tuple[tuple, ...]  # (symbol, entity, period)
    y_lb: np.ndarray
    y_ub: np.ndarray
    f: np.ndarray
    y_period: np.ndarray
    integers: np.ndarray
    z_names: tuple[str, ...]
    z_keys: tuple[tuple, ...]  # (symbol, entity, sub-period id)
    z_lb: np.ndarray
    z_ub: np.ndarray
    z_sub: np.ndarray

    @cached_property
    def y_index(self) -> dict:
        return {k: i for i, k in enumerate(self.y_keys)}

    @cached_property
    def z_index(self) -> dict:
        return {k: i for i, k in enumerate(self.z_keys)}

    def y_cols(self, period: int) -> np.ndarray:
        return np.flatnonzero(self.y_period == period)

    def z_cols(self, w_id: int) -> np.ndarray:
        return np.flatnonzero(self.z_sub == w_id)


def _policies_for(inst: CEMInstance, p_id: int, scenario: str):
    return [q for q in inst.policies if (p_id, scenario) in set(q.scope)]


def planning_layout(inst: CEMInstance) -> PlanningLayout:
    y_keys, y_lb, y_ub, f, y_per = [], [], [], [], []
    for p in inst.periods:
        fcf = p.fixed_cost_factor
        entries = []
        for r in inst.resources:
            u = r.unit_size_mw
            entries.append((("cap", r.id, p.id), 0.0, r.existing_mw + r.max_build_mw, r.fom_cost * fcf))
            entries.append((("new", r.id, p.id), 0.0, r.max_build_mw / u, r.inv_cost * u * fcf))
            entries.append((("ret", r.id, p.id), 0.0, r.max_retire_mw / u, r.retire_cost * u * fcf))
        for l in inst.links:
            entries.append((("tcap", l.id, p.id), 0.0, l.existing_mw + l.max_build_mw, l.fom_cost * fcf))
            entries.append((("tnew", l.id, p.id), 0.0, l.max_build_mw, l.inv_cost * fcf))
        entries.sort(key=lambda e: (e[0][0], e[0][1]))
        for key, lo, hi, cost in entries:
            y_keys.append(key)
            y_lb.append(lo)
            y_ub.append(hi)
            f.append(cost)
            y_per.append(p.id)
    disc = set(inst.discrete)
    integers = [i for i, (sym, ent, _) in enumerate(y_keys) if f"{sym}:{ent}" in disc]

    z_keys, z_sub = [], []
    for p in inst.periods:
        for w in sorted(p.subperiods, key=lambda w: w.id):
            keys = []
            for r in inst.resources:
                if r.kind in MDS_KINDS:
                    keys.append(("z_end", r.id, w.id))
                    keys.append(("z_start", r.id, w.id))
            for q in _policies_for(inst, p.id, w.scenario):
                keys.append(("z_b", q.id, w.id))
            keys.sort(key=lambda k: (k[0], k[1]))
            z_keys.extend(keys)
            z_sub.extend([w.id] * len(keys))
    nz = len(z_keys)
    return PlanningLayout(
        y_names=tuple(f"p{p}_{sym}_{ent}" for sym, ent, p in y_keys),
        y_keys=tuple(y_keys),
        y_lb=np.array(y_lb, float),
        y_ub=np.array(y_ub, float),
        f=np.array(f, float),
        y_period=np.array(y_per, int),
        integers=np.array(integers, int),
        z_names=tuple(f"w{w}_{sym}_{ent}" for sym, ent, w in z_keys),
        z_keys=tuple(z_keys),
        z_lb=np.zeros(nz),
        z_ub=np.full(nz, np.inf),
        z_sub=np.array(z_sub, int),
    )


class _RowSet:
    """Accumulates rows whose coefficients live in separate column spaces."""

    def __init__(self, spaces: tuple[str, ...]):
        self.spaces = spaces
        self.coo = {s: ([], [], []) for s in spaces}
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self.names: list[str] = []

    def add(self, name: str, sense: str, rhs: float, **terms) -> int:
        i = len(self.senses)
        for space, coefs in terms.items():
            r, c, v = self.coo[space]
            for j, a in coefs:
                if a != 0.0:
                    r.append(i)
                    c.append(j)
                    v.append(float(a))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.names.append(name)
        return i

    def block(self, space: str, ncols: int) -> SparseBlock:
        r, c, v = self.coo[space]
        return SparseBlock.from_coo(len(self.senses), ncols, r, c, v)


@dataclass(frozen=True)
class OperationalBlock:
    """Rows ``A x + B y_p + Q z_w (sense) b`` of one sub-period and its cost ``c``."""

    w: int
    period: int
    scenario: str
    weight: float
    x_names: tuple[str, ...]
    x_keys: tuple[tuple, ...]  # (symbol, entity, hour or None)
    x_lb: np.ndarray
    x_ub: np.ndarray
    c: np.ndarray
    A: SparseBlock
    B: SparseBlock
    Q: SparseBlock
    senses: np.ndarray
    b: np.ndarray
    row_names: tuple[str, ...]
    y_cols: np.ndarray  # global y positions of B's columns
    z_cols: np.ndarray  # global z positions of Q's columns

    @cached_property
    def catalog(self) -> dict:
        return {k: i for i, k in enumerate(self.x_keys)}

    @property
    def num_x(self) -> int:
        return len(self.x_keys)

    def __iter__(self):
        # tuple-style unpacking: A, b, B, Q, c
        return iter((self.A, self.b, self.B, self.Q, self.c))


def _x_keys(inst: CEMInstance, w: SubPeriod, mode: str) -> list[tuple]:
    H = w.hours
    keys = []
    hours = range(H)
    for r in inst.resources:
        keys += [("x_d", r.id, t) for t in hours]
        if r.kind in (SHORT_STORAGE, MDS_STORAGE):
            keys += [("x_c", r.id, t) for t in hours]
        if r.is_storage:
            keys += [("x_soc", r.id, t) for t in hours]
        if r.kind == HYDRO:
            keys += [("x_spill", r.id, t) for t in hours]
        if r.kind == THERMAL:
            keys += [("x_u", r.id, t) for t in hours]
            keys += [("x_su", r.id, t) for t in hours]
        if r.kind in MDS_KINDS:
            keys += [("s_mds_pos", r.id, None), ("s_mds_neg", r.id, None)]
    for l in inst.links:
        keys += [("x_flow_f", l.id, t) for t in hours] + [("x_flow_b", l.id, t) for t in hours]
    for z in inst.zones:
        keys += [("x_nse", z.id, t) for t in hours]
    if mode == DECOMPOSED:
        p = inst.period_of(w.id)
        keys += [("s_policy", q.id, None) for q in _policies_for(inst, p.id, w.scenario)]
    keys.sort(key=lambda k: (k[0], k[1], -1 if k[2] is None else k[2]))
    return keys


def _xname(w_id: int, key: tuple) -> str:
    sym, ent, t = key
    return f"w{w_id}_{sym}_{ent}" if t is None else f"w{w_id}_{sym}_{ent}_{t}"


def build_operational_block(inst: CEMInstance, w_id: int, layout: PlanningLayout | None = None,
                            *, mode: str = DECOMPOSED) -> OperationalBlock:
    """Operational rows of one sub-period.

    In ``chained`` mode the multi-day storage hour-0 rows and the policy rows
    are left to the monolithic assembler, which links sub-periods directly.
    """
    layout = layout or planning_layout(inst)
    w = inst.subperiod(w_id)
    p = inst.period_of(w_id)
    vcf = p.variable_cost_factor
    H = w.hours
    pen = inst.penalties
    keys = _x_keys(inst, w, mode)
    xi = {k: i for i, k in enumerate(keys)}
    nx = len(keys)
    lb = np.zeros(nx)
    ub = np.full(nx, np.inf)
    c = np.zeros(nx)

    y_cols = layout.y_cols(p.id)
    y_loc = {layout.y_keys[j][:2]: k for k, j in enumerate(y_cols)}
    z_cols = layout.z_cols(w_id) if mode == DECOMPOSED else np.zeros(0, int)
    z_loc = {layout.z_keys[j][:2]: k for k, j in enumerate(z_cols)}

    def X(sym, ent, t=None):
        return xi[(sym, ent, t)]

    def Y(sym, ent):
        return y_loc[(sym, ent)]

    def Z(sym, ent):
        return z_loc[(sym, ent)]

    for r in inst.resources:
        for t in range(H):
            c[X("x_d", r.id, t)] = r.var_cost * vcf
            if r.kind == THERMAL:
                c[X("x_su", r.id, t)] = r.startup_cost * vcf
        if r.kind in MDS_KINDS:
            c[X("s_mds_pos", r.id)] = pen.mds_penalty * vcf
            c[X("s_mds_neg", r.id)] = pen.mds_penalty * vcf
    for z in inst.zones:
        for t in range(H):
            j = X("x_nse", z.id, t)
            c[j] = pen.nse_cost * vcf
            ub[j] = w.demand[z.id][t]
    policies = _policies_for(inst, p.id, w.scenario) if mode == DECOMPOSED else []
    for q in policies:
        c[X("s_policy", q.id)] = q.penalty * vcf

    rows = _RowSet(("x", "y", "z"))
    prev = [(t - 1) % H for t in range(H)]
    wn = f"w{w_id}"

    # 1. balance
    for z in inst.zones:
        for t in range(H):
            terms = [(X("x_nse", z.id, t), 1.0)]
            for r in inst.resources:
                if r.zone != z.id:
                    continue
                terms.append((X("x_d", r.id, t), 1.0))
                if r.kind in (SHORT_STORAGE, MDS_STORAGE):
                    terms.append((X("x_c", r.id, t), -1.0))
            for l in inst.links:
                if l.to_zone == z.id:
                    terms += [(X("x_flow_f", l.id, t), 1.0 - l.loss), (X("x_flow_b", l.id, t), -1.0)]
                if l.from_zone == z.id:
                    terms += [(X("x_flow_f", l.id, t), -1.0), (X("x_flow_b", l.id, t), 1.0 - l.loss)]
            rows.add(f"{wn}_balance_{z.id}_{t}", EQ, w.demand[z.id][t], x=terms)

    # 2. capacity and availability
    for r in inst.resources:
        cap = Y("cap", r.id)
        if r.kind == THERMAL:
            for t in range(H):
                rows.add(f"{wn}_commit_{r.id}_{t}", LE, 0.0,
                         x=[(X("x_u", r.id, t), 1.0)], y=[(cap, -1.0)])
            for t in range(H):
                rows.add(f"{wn}_dispatch_{r.id}_{t}", LE, 0.0,
                         x=[(X("x_d", r.id, t), 1.0), (X("x_u", r.id, t), -1.0)])
            if r.min_stable > 0:
                for t in range(H):
                    rows.add(f"{wn}_minstable_{r.id}_{t}", LE, 0.0,
                             x=[(X("x_u", r.id, t), r.min_stable), (X("x_d", r.id, t), -1.0)])
        elif r.kind == VRE:
            for t in range(H):
                rows.add(f"{wn}_avail_{r.id}_{t}", LE, 0.0,
                         x=[(X("x_d", r.id, t), 1.0)], y=[(cap, -w.availability[r.id][t])])
        else:
            for t in range(H):
                rows.add(f"{wn}_discharge_{r.id}_{t}", LE, 0.0,
                         x=[(X("x_d", r.id, t), 1.0)], y=[(cap, -1.0)])
            if r.kind != HYDRO:
                for t in range(H):
                    rows.add(f"{wn}_charge_{r.id}_{t}", LE, 0.0,
                             x=[(X("x_c", r.id, t), 1.0)], y=[(cap, -1.0)])
            for t in range(H):
                rows.add(f"{wn}_energy_{r.id}_{t}", LE, 0.0,
                         x=[(X("x_soc", r.id, t), 1.0)], y=[(cap, -r.energy_ratio)])
    for l in inst.links:
        tcap = Y("tcap", l.id)
        for sym, kind in (("x_flow_f", "flowf"), ("x_flow_b", "flowb")):
            for t in range(H):
                rows.add(f"{wn}_{kind}_{l.id}_{t}", LE, 0.0,
                         x=[(X(sym, l.id, t), 1.0)], y=[(tcap, -1.0)])

    # 3. startup
    for r in inst.resources:
        if r.kind != THERMAL:
            continue
        for t in range(H):
            rows.add(f"{wn}_startup_{r.id}_{t}", LE, 0.0,
                     x=[(X("x_u", r.id, t), 1.0), (X("x_u", r.id, prev[t]), -1.0),
                        (X("x_su", r.id, t), -1.0)])

    # 4. ramping
    for r in inst.resources:
        if r.kind != THERMAL or r.ramp_rate >= 1.0 or H < 2:
            continue
        cap = Y("cap", r.id)
        for t in range(H):
            rows.add(f"{wn}_rampup_{r.id}_{t}", LE, 0.0,
                     x=[(X("x_d", r.id, t), 1.0), (X("x_d", r.id, prev[t]), -1.0)],
                     y=[(cap, -r.ramp_rate)])
        for t in range(H):
            rows.add(f"{wn}_rampdown_{r.id}_{t}", LE, 0.0,
                     x=[(X("x_d", r.id, prev[t]), 1.0), (X("x_d", r.id, t), -1.0)],
                     y=[(cap, -r.ramp_rate)])

    # 5. short storage, cyclic
    for r in inst.resources:
        if r.kind != SHORT_STORAGE:
            continue
        for t in range(H):
            rows.add(f"{wn}_soc_{r.id}_{t}", EQ, 0.0, x=_state_terms(X, r, t, prev[t]))

    # 6. multi-day storage
    for r in inst.resources:
        if r.kind not in MDS_KINDS:
            continue
        inflow = w.inflow.get(r.id, (0.0,) * H) if r.kind == HYDRO else (0.0,) * H
        for t in range(H):
            if t == 0:
                terms = _state_terms(X, r, 0, None)
                if mode == DECOMPOSED:
                    rows.add(f"{wn}_soc_{r.id}_0", EQ, inflow[0], x=terms,
                             z=[(Z("z_start", r.id), -(1.0 - r.eta_self))])
                else:
                    rows.add(f"{wn}_soc_{r.id}_0", EQ, inflow[0], x=terms)
            else:
                rows.add(f"{wn}_soc_{r.id}_{t}", EQ, inflow[t], x=_state_terms(X, r, t, t - 1))
        if mode == DECOMPOSED:
            rows.add(f"{wn}_socend_{r.id}", EQ, 0.0,
                     x=[(X("x_soc", r.id, H - 1), 1.0), (X("s_mds_pos", r.id), 1.0),
                        (X("s_mds_neg", r.id), -1.0)],
                     z=[(Z("z_end", r.id), -1.0)])

    # 7. budgeted policies
    for q in policies:
        if q.kind == CO2_CAP:
            terms = [(X("x_d", r.id, t), r.co2_rate) for r in inst.resources if r.co2_rate > 0
                     for t in range(H)]
            terms.append((X("s_policy", q.id), -1.0))
            rows.add(f"{wn}_policy_{q.id}", LE, 0.0, x=terms, z=[(Z("z_b", q.id), -1.0)])
        elif q.kind == MIN_SHARE:
            terms = [(X("x_d", r.id, t), -1.0) for r in inst.resources if r.kind in CLEAN_KINDS
                     for t in range(H)]
            terms.append((X("s_policy", q.id), -1.0))
            rows.add(f"{wn}_policy_{q.id}", LE, 0.0, x=terms, z=[(Z("z_b", q.id), 1.0)])

    return OperationalBlock(
        w=w_id, period=p.id, scenario=w.scenario, weight=inst.probability(w.scenario),
        x_names=tuple(_xname(w_id, k) for k in keys), x_keys=tuple(keys),
        x_lb=lb, x_ub=ub, c=c,
        A=rows.block("x", nx), B=rows.block("y", y_cols.size), Q=rows.block("z", z_cols.size),
        senses=np.array(rows.senses), b=np.array(rows.rhs), row_names=tuple(rows.names),
        y_cols=y_cols, z_cols=z_cols,
    )


def _state_terms(X, r, t, tp):
    """soc[t] - (1-eta_self) soc[tp] - eta_c c[t] + d[t]/eta_d (+ spill[t])."""
    terms = [(X("x_soc", r.id, t), 1.0)]
    if tp is not None:
        terms.append((X("x_soc", r.id, tp), -(1.0 - r.eta_self)))
    if r.kind != HYDRO:
        terms.append((X("x_c", r.id, t), -r.eta_charge))
    terms.append((X("x_d", r.id, t), 1.0 / r.eta_discharge))
    if r.kind == HYDRO:
        terms.append((X("x_spill", r.id, t), 1.0))
    return terms


@dataclass(frozen=True)
class PlanningRows:
    """Rows over the stacked planning vector (y, z)."""

    Y: SparseBlock
    Z: SparseBlock
    senses: np.ndarray
    rhs: np.ndarray
    names: tuple[str, ...]
    kinds: tuple[str, ...]  # "multiperiod", "linking" or "coupling"

    def select(self, kind: str) -> np.ndarray:
        return np.array([i for i, k in enumerate(self.kinds) if k == kind], dtype=int)


def build_coupling_blocks(inst: CEMInstance, layout: PlanningLayout | None = None) -> PlanningRows:
    """Multi-period rows, then linking rows per sub-period, then coupling rows per (period, scenario)."""
    layout = layout or planning_layout(inst)
    yi, zi = layout.y_index, layout.z_index
    rows = _RowSet(("y", "z"))
    kinds: list[str] = []

    def add(kind, *args, **kw):
        rows.add(*args, **kw)
        kinds.append(kind)

    # multi-period carry-over
    periods = [p.id for p in inst.periods]
    for r in inst.resources:
        u = r.unit_size_mw
        for k, pid in enumerate(periods):
            terms = [(yi[("cap", r.id, pid)], 1.0), (yi[("new", r.id, pid)], -u),
                     (yi[("ret", r.id, pid)], u)]
            if k > 0:
                terms.append((yi[("cap", r.id, periods[k - 1])], -1.0))
            add("multiperiod", f"p{pid}_capbal_{r.id}", EQ, r.existing_mw if k == 0 else 0.0, y=terms)
        if r.max_build_mw > 0:
            add("multiperiod", f"buildlim_{r.id}", LE, r.max_build_mw,
                y=[(yi[("new", r.id, pid)], u) for pid in periods])
        if r.max_retire_mw > 0:
            add("multiperiod", f"retirelim_{r.id}", LE, r.max_retire_mw,
                y=[(yi[("ret", r.id, pid)], u) for pid in periods])
    for l in inst.links:
        for k, pid in enumerate(periods):
            terms = [(yi[("tcap", l.id, pid)], 1.0), (yi[("tnew", l.id, pid)], -1.0)]
            if k > 0:
                terms.append((yi[("tcap", l.id, periods[k - 1])], -1.0))
            add("multiperiod", f"p{pid}_tcapbal_{l.id}", EQ, l.existing_mw if k == 0 else 0.0, y=terms)
        if l.max_build_mw > 0:
            add("multiperiod", f"tbuildlim_{l.id}", LE, l.max_build_mw,
                y=[(yi[("tnew", l.id, pid)], 1.0) for pid in periods])

    # linking: boundary levels within installed energy capacity
    mds = [r for r in inst.resources if r.kind in MDS_KINDS]
    for p in inst.periods:
        for w in sorted(p.subperiods, key=lambda w: w.id):
            for r in mds:
                for sym in ("z_start", "z_end"):
                    add("linking", f"w{w.id}_{sym}lim_{r.id}", LE, 0.0,
                        z=[(zi[(sym, r.id, w.id)], 1.0)],
                        y=[(yi[("cap", r.id, p.id)], -r.energy_ratio)])

    # scenario coupling
    for p in inst.periods:
        for s in inst.scenarios:
            ws = sorted((w.id for w in p.subperiods_of(s.id)))
            if not ws:
                continue
            for r in mds:
                for a, b in zip(ws[:-1], ws[1:]):
                    add("coupling", f"w{b}_chain_{r.id}", EQ, 0.0,
                        z=[(zi[("z_start", r.id, b)], 1.0), (zi[("z_end", r.id, a)], -1.0)])
                if inst.mds_wrap:
                    add("coupling", f"w{ws[0]}_wrap_{r.id}", EQ, 0.0,
                        z=[(zi[("z_start", r.id, ws[0])], 1.0), (zi[("z_end", r.id, ws[-1])], -1.0)])
            for q in _policies_for(inst, p.id, s.id):
                add("coupling", f"p{p.id}_{s.id}_budget_{q.id}", EQ, policy_budget(inst, q, p.id, s.id),
                    z=[(zi[("z_b", q.id, wid)], 1.0) for wid in ws])

    return PlanningRows(
        Y=rows.block("y", len(layout.y_keys)), Z=rows.block("z", len(layout.z_keys)),
        senses=np.array(rows.senses), rhs=np.array(rows.rhs), names=tuple(rows.names),
        kinds=tuple(kinds),
    )


def policy_budget(inst: CEMInstance, q, p_id: int, scenario: str) -> float:
    """Right-hand side of the budget equality: the cap, or the required clean energy."""
    if q.kind == CO2_CAP:
        return float(q.target)
    p = next(p for p in inst.periods if p.id == p_id)
    total = sum(sum(vals) for w in p.subperiods_of(scenario) for vals in w.demand.values())
    return float(q.target) * total


@dataclass(frozen=True)
class BlockProblem:
    name: str
    layout: PlanningLayout
    planning: PlanningRows
    blocks: tuple[OperationalBlock, ...]  # by period, then sub-period id
    mds_wrap: bool = True

    @property
    def num_y(self) -> int:
        return len(self.layout.y_keys)

    @property
    def num_z(self) -> int:
        return len(self.layout.z_keys)

    @property
    def num_cols(self) -> int:
        return self.num_y + self.num_z + sum(b.num_x for b in self.blocks)

    @property
    def integers(self) -> np.ndarray:
        return self.layout.integers

    def block(self, w_id: int) -> OperationalBlock:
        for b in self.blocks:
            if b.w == w_id:
                return b
        raise KeyError(w_id)

    def column(self, symbol: str, entity: str, index) -> int:
        """Position of a column in the stacked (y, z, x_w1, x_w2, ...) vector.

        ``index`` is the period for y symbols, the sub-period id for z
        symbols and ``(sub-period id, hour)`` for x symbols.
        """
        lay = self.layout
        if (symbol, entity, index) in lay.y_index:
            return lay.y_index[(symbol, entity, index)]
        if (symbol, entity, index) in lay.z_index:
            return self.num_y + lay.z_index[(symbol, entity, index)]
        w_id, hour = index
        off = self.num_y + self.num_z
        for b in self.blocks:
            if b.w == w_id:
                return off + b.catalog[(symbol, entity, hour)]
            off += b.num_x
        raise KeyError((symbol, entity, index))

    def digest(self) -> str:
        h = hashlib.sha256()
        lay = self.layout

        def put(*arrs):
            for a in arrs:
                if isinstance(a, SparseBlock):
                    put(np.array([a.rows, a.cols]), a.row_idx, a.col_idx, a.values)
                elif isinstance(a, np.ndarray):
                    h.update(str(a.dtype).encode())
                    h.update(np.ascontiguousarray(a).tobytes())
                else:
                    h.update(repr(a).encode())

        put(lay.y_keys, lay.y_lb, lay.y_ub, lay.f, lay.integers, lay.z_keys, lay.z_lb, lay.z_ub)
        pr = self.planning
        put(pr.Y, pr.Z, pr.senses, pr.rhs, pr.names)
        for b in self.blocks:
            put(b.w, b.weight, b.x_keys, b.x_lb, b.x_ub, b.c, b.A, b.B, b.Q, b.senses, b.b,
                b.row_names, b.y_cols, b.z_cols)
        return h.hexdigest()


def assemble_block_problem(inst: CEMInstance) -> BlockProblem:
    layout = planning_layout(inst)
    planning = build_coupling_blocks(inst, layout)
    blocks = tuple(build_operational_block(inst, w.id, layout)
                   for p in inst.periods for w in sorted(p.subperiods, key=lambda w: w.id))
    return BlockProblem(inst.name, layout, planning, blocks, inst.mds_wrap)
