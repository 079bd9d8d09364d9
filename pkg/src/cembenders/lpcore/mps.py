"""MPS export/import and the CSV solution exchange format.

Writer emits free-format MPS (names up to 64 characters, no spaces) with
explicit bounds on every column, so any reader's default-bound conventions do
not matter.  Solution files look like::

    status,objective
    optimal,12.5
    column,value
    x1,2.0
    row,dual
    r1,0.5
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..errors import ParseError
from .problem import LPProblem, PrimalDualSolution

MAX_NAME = 64
_OBJ = "COST"


def _num(v: float) -> str:
    return repr(float(v))


def _check_names(names, kind):
    for nm in names:
        if len(nm) > MAX_NAME or any(ch.isspace() for ch in nm) or not nm:
            raise ValueError(f"{kind} name {nm!r} is not a valid free-MPS name")


def export_mps(p: LPProblem, path) -> Path:
    path = Path(path)
    _check_names(p.col_names, "column")
    _check_names(p.row_names, "row")
    ints = set(p.integers.tolist())
    csc = sp.csc_matrix(p.A)
    csc.sort_indices()
    lines = [f"NAME {p.name}", "ROWS", f" N  {_OBJ}"]
    lines += [f" {s}  {r}" for s, r in zip(p.senses, p.row_names)]
    lines.append("COLUMNS")
    in_int = False
    for j, cname in enumerate(p.col_names):
        if (j in ints) != in_int:
            marker = "INTORG" if not in_int else "INTEND"
            lines.append(f"    MARKER  'MARKER'  '{marker}'")
            in_int = not in_int
        entries = []
        if p.c[j] != 0.0:
            entries.append((_OBJ, p.c[j]))
        for k in range(csc.indptr[j], csc.indptr[j + 1]):
            entries.append((p.row_names[csc.indices[k]], csc.data[k]))
        if not entries:
            entries.append((_OBJ, 0.0))
        for rname, val in entries:
            lines.append(f"    {cname}  {rname}  {_num(val)}")
    if in_int:
        lines.append("    MARKER  'MARKER'  'INTEND'")
    lines.append("RHS")
    for i, rname in enumerate(p.row_names):
        if p.rhs[i] != 0.0:
            lines.append(f"    RHS  {rname}  {_num(p.rhs[i])}")
    if p.offset:
        lines.append(f"    RHS  {_OBJ}  {_num(-p.offset)}")
    lines.append("BOUNDS")
    for j, cname in enumerate(p.col_names):
        lo, up = p.lb[j], p.ub[j]
        if lo == up:
            lines.append(f" FX BND  {cname}  {_num(lo)}")
            continue
        if math.isinf(lo) and math.isinf(up):
            lines.append(f" FR BND  {cname}")
            continue
        lines.append(f" MI BND  {cname}" if math.isinf(lo) else f" LO BND  {cname}  {_num(lo)}")
        lines.append(f" PL BND  {cname}" if math.isinf(up) else f" UP BND  {cname}  {_num(up)}")
    if p.Q is not None and p.Q.nnz:
        lines.append("QUADOBJ")
        q = sp.triu(p.Q, format="coo")
        for i, j, v in sorted(zip(q.row.tolist(), q.col.tolist(), q.data.tolist())):
            lines.append(f"    {p.col_names[i]}  {p.col_names[j]}  {_num(v)}")
    lines.append("ENDATA")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_mps(path) -> LPProblem:
    """Parse a free-format MPS file as written by :func:`export_mps`."""
    path = Path(path)
    section = None
    name = "problem"
    obj_row = None
    rows: dict[str, int] = {}
    senses: list[str] = []
    cols: dict[str, int] = {}
    trip_r, trip_c, trip_v = [], [], []
    cost: dict[int, float] = {}
    rhs: dict[int, float] = {}
    offset = 0.0
    bounds: dict[int, list[float]] = {}
    ints: set[int] = set()
    quad = []
    in_int = False
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0].upper()
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "QUADOBJ", "RANGES"):
                raise ParseError(f"unknown section {section!r}", line=lineno)
            continue
        try:
            if section == "ROWS":
                s, rname = tok[0].upper(), tok[1]
                if s == "N":
                    obj_row = obj_row or rname
                else:
                    rows[rname] = len(senses)
                    senses.append(s)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1].strip("'").upper() == "MARKER":
                    in_int = tok[2].strip("'").upper() == "INTORG"
                    continue
                cname = tok[0]
                j = cols.setdefault(cname, len(cols))
                if in_int:
                    ints.add(j)
                for rname, val in zip(tok[1::2], tok[2::2]):
                    if rname == obj_row:
                        cost[j] = float(val)
                    elif rname in rows:
                        trip_r.append(rows[rname])
                        trip_c.append(j)
                        trip_v.append(float(val))
                    else:
                        raise ParseError(f"unknown row {rname!r}", line=lineno)
            elif section == "RHS":
                for rname, val in zip(tok[1::2], tok[2::2]):
                    if rname == obj_row:
                        offset = -float(val)
                    elif rname in rows:
                        rhs[rows[rname]] = float(val)
                    else:
                        raise ParseError(f"unknown row {rname!r}", line=lineno)
            elif section == "BOUNDS":
                kind, cname = tok[0].upper(), tok[2]
                if cname not in cols:
                    raise ParseError(f"unknown column {cname!r}", line=lineno)
                b = bounds.setdefault(cols[cname], [0.0, math.inf])
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if kind == "LO":
                    b[0] = val
                elif kind == "UP":
                    b[1] = val
                elif kind == "FX":
                    b[0] = b[1] = val
                elif kind == "FR":
                    b[0], b[1] = -math.inf, math.inf
                elif kind == "MI":
                    b[0] = -math.inf
                elif kind == "PL":
                    b[1] = math.inf
                elif kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                    ints.add(cols[cname])
                else:
                    raise ParseError(f"unsupported bound type {kind}", line=lineno)
            elif section == "QUADOBJ":
                quad.append((cols[tok[0]], cols[tok[1]], float(tok[2])))
            elif section == "RANGES":
                raise ParseError("RANGES section is not supported", line=lineno)
        except (IndexError, ValueError, KeyError) as exc:
            raise ParseError(f"malformed {section} entry: {raw.strip()!r} ({exc})", line=lineno) from exc
    m, n = len(senses), len(cols)
    A = sp.csr_matrix((trip_v, (trip_r, trip_c)), shape=(m, n))
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for j, (lo, up) in bounds.items():
        lb[j], ub[j] = lo, up
    Q = None
    if quad:
        qi, qj, qv = zip(*quad)
        Q = sp.coo_matrix((qv, (qi, qj)), shape=(n, n)).tocsr()
        Q = Q + sp.triu(Q, k=1).T
    return LPProblem(A, np.array(senses), b, c, lb, ub, Q=Q, offset=offset,
                     col_names=list(cols), row_names=list(rows),
                     integers=np.array(sorted(ints), dtype=int), name=name)


def write_solution(sol: PrimalDualSolution, p: LPProblem, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["status", "objective"])
        w.writerow([sol.status, _num(sol.objective)])
        w.writerow(["column", "value"])
        for nm, v in zip(p.col_names, sol.x):
            w.writerow([nm, _num(v)])
        w.writerow(["row", "dual"])
        for nm, v in zip(p.row_names, sol.duals):
            w.writerow([nm, _num(v)])
    return path


def import_solution(path, p: LPProblem | None = None) -> PrimalDualSolution:
    """Read a solution file; with ``p`` given, every column and row must be present."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        records = list(csv.reader(fh))
    if len(records) < 2 or records[0] != ["status", "objective"]:
        raise ParseError("expected header 'status,objective'", line=1)
    try:
        status, obj = records[1][0], float(records[1][1])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad status line: {records[1]}", line=2) from exc
    values: dict[str, float] = {}
    duals: dict[str, float] = {}
    target = None
    for lineno, rec in enumerate(records[2:], start=3):
        if not rec:
            continue
        if rec == ["column", "value"]:
            target = values
            continue
        if rec == ["row", "dual"]:
            target = duals
            continue
        if target is None or len(rec) != 2:
            raise ParseError(f"unexpected record {rec}", line=lineno)
        try:
            target[rec[0]] = float(rec[1])
        except ValueError as exc:
            raise ParseError(f"non-numeric value {rec[1]!r}", line=lineno) from exc
    if p is None:
        x = np.array(list(values.values()))
        y = np.array(list(duals.values()))
    else:
        missing = [nm for nm in p.col_names if nm not in values]
        if missing:
            raise ParseError(f"solution is missing column {missing[0]!r}", line=len(records),
                             column=missing[0])
        extra = [nm for nm in values if nm not in set(p.col_names)]
        if extra:
            raise ParseError(f"solution has unknown column {extra[0]!r}", line=len(records))
        missing_rows = [nm for nm in p.row_names if nm not in duals]
        if missing_rows:
            raise ParseError(f"solution is missing row {missing_rows[0]!r}", line=len(records),
                             row=missing_rows[0])
        x = np.array([values[nm] for nm in p.col_names])
        y = np.array([duals[nm] for nm in p.row_names])
    sol = PrimalDualSolution(status, x, obj, y, np.zeros_like(x))
    sol.info["col_names"] = list(values)
    sol.info["row_names"] = list(duals)
    return sol
