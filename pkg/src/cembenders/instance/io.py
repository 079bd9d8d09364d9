"""Directory format for instances, plus a canonical text form and content hash.

Layout of an instance directory::

    settings.csv     key,value
    zones.csv        id
    resources.csv    one row per resource, blank cells for absent storage fields
    links.csv
    scenarios.csv    id,probability
    periods.csv      id,fixed_cost_factor,variable_cost_factor
    subperiods.csv   id,period,scenario,hours
    policies.csv     id,kind,target,penalty,scope  (scope as "period:scenario;...")
    series/w<id>_demand.csv, w<id>_availability.csv, w<id>_inflow.csv
                     hour,entity_id,value

Floats are written with ``repr`` so a round trip is exact.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, fields
from pathlib import Path

from ..errors import ParseError
from .model import (
    CEMInstance, PenaltyConfig, PlanningPeriod, Policy, Resource, Scenario, SubPeriod,
    TransmissionLink, Zone,
)

_RES_FIELDS = [f.name for f in fields(Resource)]
_LINK_FIELDS = [f.name for f in fields(TransmissionLink)]
_STR_FIELDS = {"id", "zone", "kind", "from_zone", "to_zone"}
_SERIES = ("demand", "availability", "inflow")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def save_instance(inst: CEMInstance, directory) -> Path:
    d = Path(directory)
    (d / "series").mkdir(parents=True, exist_ok=True)
    pen = inst.penalties
    _write(d / "settings.csv", ["key", "value"], [
        ("name", inst.name),
        ("co2_penalty", float(pen.co2_penalty)),
        ("nse_cost", float(pen.nse_cost)),
        ("mds_boundary_penalty", None if pen.mds_boundary_penalty is None
         else float(pen.mds_boundary_penalty)),
        ("mds_wrap", bool(inst.mds_wrap)),
        ("discrete", ";".join(inst.discrete)),
    ])
    _write(d / "zones.csv", ["id"], [(z.id,) for z in inst.zones])
    _write(d / "resources.csv", _RES_FIELDS,
           [[getattr(r, f) for f in _RES_FIELDS] for r in inst.resources])
    _write(d / "links.csv", _LINK_FIELDS,
           [[getattr(l, f) for f in _LINK_FIELDS] for l in inst.links])
    _write(d / "scenarios.csv", ["id", "probability"],
           [(s.id, float(s.probability)) for s in inst.scenarios])
    _write(d / "periods.csv", ["id", "fixed_cost_factor", "variable_cost_factor"],
           [(p.id, float(p.fixed_cost_factor), float(p.variable_cost_factor)) for p in inst.periods])
    _write(d / "subperiods.csv", ["id", "period", "scenario", "hours"],
           [(w.id, p.id, w.scenario, w.hours) for p in inst.periods for w in p.subperiods])
    _write(d / "policies.csv", ["id", "kind", "target", "penalty", "scope"],
           [(q.id, q.kind, float(q.target), float(q.penalty),
             ";".join(f"{p}:{s}" for p, s in q.scope)) for q in inst.policies])
    for w in inst.subperiods:
        for label in _SERIES:
            series = getattr(w, label)
            _write(d / "series" / f"w{w.id}_{label}.csv", ["hour", "entity_id", "value"],
                   [(t, ent, float(vals[t])) for ent, vals in series.items() for t in range(len(vals))])
    return d


class _Table:
    """Rows of one CSV file with line numbers kept for error messages."""

    def __init__(self, path: Path, header: list[str] | None = None, required: bool = True):
        self.path = path
        self.rows: list[tuple[int, dict]] = []
        if not path.exists():
            if required:
                raise ParseError(f"missing file {path.name}", file=str(path))
            return
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                head = next(reader)
            except StopIteration:
                raise ParseError(f"{path.name} is empty", line=1, file=str(path)) from None
            if header is not None and head[: len(header)] != header:
                raise ParseError(f"{path.name} header {head} does not match {header}", line=1,
                                 file=str(path))
            for row in reader:
                if not row:
                    continue
                if len(row) != len(head):
                    raise ParseError(f"{path.name} has {len(row)} cells, expected {len(head)}",
                                     line=reader.line_num, file=str(path))
                self.rows.append((reader.line_num, dict(zip(head, row))))

    def num(self, line: int, cell: str, name: str, *, optional=False, kind=float):
        if cell == "" and optional:
            return None
        try:
            return kind(cell)
        except ValueError:
            raise ParseError(f"{self.path.name}: field {name} = {cell!r} is not a number",
                             line=line, file=str(self.path)) from None


def load_instance(directory) -> CEMInstance:
    d = Path(directory)
    if not d.is_dir():
        raise ParseError(f"instance directory {d} does not exist")
    settings = {}
    st = _Table(d / "settings.csv", ["key", "value"])
    for _, row in st.rows:
        settings[row["key"]] = row["value"]

    zones = tuple(Zone(row["id"]) for _, row in _Table(d / "zones.csv", ["id"]).rows)

    rt = _Table(d / "resources.csv", _RES_FIELDS)
    resources = []
    for line, row in rt.rows:
        kw = {}
        for f in _RES_FIELDS:
            if f in _STR_FIELDS:
                kw[f] = row[f]
            else:
                kw[f] = rt.num(line, row[f], f, optional=f.startswith(("eta_", "energy_")))
        resources.append(Resource(**kw))

    lt = _Table(d / "links.csv", _LINK_FIELDS, required=False)
    links = []
    for line, row in lt.rows:
        links.append(TransmissionLink(**{
            f: row[f] if f in _STR_FIELDS else lt.num(line, row[f], f) for f in _LINK_FIELDS
        }))

    sct = _Table(d / "scenarios.csv", ["id", "probability"])
    scenarios = tuple(Scenario(row["id"], sct.num(line, row["probability"], "probability"))
                      for line, row in sct.rows)

    series = {}
    for path in sorted((d / "series").glob("w*_*.csv")) if (d / "series").is_dir() else ():
        stem = path.stem
        wpart, _, label = stem.partition("_")
        if label not in _SERIES:
            raise ParseError(f"unexpected series file {path.name}", file=str(path))
        try:
            wid = int(wpart[1:])
        except ValueError:
            raise ParseError(f"series file {path.name} lacks a sub-period id", file=str(path)) from None
        tab = _Table(path, ["hour", "entity_id", "value"])
        by_ent: dict[str, dict[int, float]] = {}
        for line, row in tab.rows:
            t = tab.num(line, row["hour"], "hour", kind=int)
            by_ent.setdefault(row["entity_id"], {})[t] = tab.num(line, row["value"], "value")
        series[(wid, label)] = by_ent

    swt = _Table(d / "subperiods.csv", ["id", "period", "scenario", "hours"])
    subs_by_period: dict[int, list[SubPeriod]] = {}
    for line, row in swt.rows:
        wid = swt.num(line, row["id"], "id", kind=int)
        hours = swt.num(line, row["hours"], "hours", kind=int)
        data = {}
        for label in _SERIES:
            ent_map = {}
            for ent, vals in series.get((wid, label), {}).items():
                if sorted(vals) != list(range(len(vals))):
                    raise ParseError(f"series {label} of sub-period {wid} for {ent} has gaps in "
                                     f"its hour index")
                ent_map[ent] = tuple(vals[t] for t in range(len(vals)))
            data[label] = ent_map
        w = SubPeriod(wid, row["scenario"], hours, data["demand"], data["availability"], data["inflow"])
        subs_by_period.setdefault(swt.num(line, row["period"], "period", kind=int), []).append(w)

    pt = _Table(d / "periods.csv", ["id", "fixed_cost_factor", "variable_cost_factor"])
    periods = []
    for line, row in pt.rows:
        pid = pt.num(line, row["id"], "id", kind=int)
        periods.append(PlanningPeriod(
            pid, tuple(subs_by_period.get(pid, ())),
            pt.num(line, row["fixed_cost_factor"], "fixed_cost_factor"),
            pt.num(line, row["variable_cost_factor"], "variable_cost_factor"),
        ))

    qt = _Table(d / "policies.csv", ["id", "kind", "target", "penalty", "scope"], required=False)
    policies = []
    for line, row in qt.rows:
        scope = []
        for item in filter(None, row["scope"].split(";")):
            p, sep, s = item.partition(":")
            if not sep:
                raise ParseError(f"policy scope item {item!r} is not period:scenario", line=line)
            scope.append((qt.num(line, p, "scope", kind=int), s))
        policies.append(Policy(row["id"], row["kind"], tuple(scope),
                               qt.num(line, row["target"], "target"),
                               qt.num(line, row["penalty"], "penalty")))

    mbp = settings.get("mds_boundary_penalty", "")
    penalties = PenaltyConfig(
        co2_penalty=float(settings.get("co2_penalty", 150.0)),
        nse_cost=float(settings.get("nse_cost", 2000.0)),
        mds_boundary_penalty=float(mbp) if mbp else None,
    )
    return CEMInstance(
        name=settings.get("name", d.name),
        periods=tuple(periods),
        scenarios=scenarios,
        zones=zones,
        resources=tuple(resources),
        links=tuple(links),
        policies=tuple(policies),
        discrete=tuple(filter(None, settings.get("discrete", "").split(";"))),
        penalties=penalties,
        mds_wrap=settings.get("mds_wrap", "true").lower() == "true",
    )


def dumps_instance(inst: CEMInstance) -> str:
    """Canonical JSON text; equal instances give equal strings."""

    def default(o):
        raise TypeError(type(o))

    data = asdict(inst)
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=default)


def instance_hash(inst: CEMInstance) -> str:
    """Git-style blob hash (sha1 of ``blob <len>\\0<canonical text>``)."""
    body = dumps_instance(inst).encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

