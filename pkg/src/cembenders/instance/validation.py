"""Invariant checks for :class:`CEMInstance`.  Validation reports; it never raises."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .model import (
    DISCRETE_FAMILIES, HYDRO, MIN_SHARE, POLICY_KINDS, RESOURCE_KINDS,
    STORAGE_KINDS, VRE, CEMInstance,
)


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    details: dict = field(default_factory=dict, compare=False)


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    def add(self, code: str, message: str, **details) -> None:
        self.issues.append(Issue(code, message, details))

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}

    def find(self, code: str) -> list[Issue]:
        return [i for i in self.issues if i.code == code]

    def __len__(self) -> int:
        return len(self.issues)

    def __str__(self) -> str:
        if self.ok:
            return "instance is well-formed"
        return "\n".join(f"[{i.code}] {i.message}" for i in self.issues)


def _finite(v) -> bool:
    return v is not None and isinstance(v, (int, float)) and math.isfinite(v)


def validate_instance(inst: CEMInstance) -> ValidationReport:
    rep = ValidationReport()

    # identifiers
    for label, ids in (
        ("zone", [z.id for z in inst.zones]),
        ("resource", [r.id for r in inst.resources]),
        ("link", [l.id for l in inst.links]),
        ("scenario", [s.id for s in inst.scenarios]),
        ("period", [p.id for p in inst.periods]),
        ("sub-period", [w.id for w in inst.subperiods]),
        ("policy", [q.id for q in inst.policies]),
    ):
        for dup, n in Counter(ids).items():
            if n > 1:
                rep.add("DUP_ID", f"{label} id {dup!r} appears {n} times", kind=label, id=dup)

    # scenarios
    probs = [s.probability for s in inst.scenarios]
    if not inst.scenarios:
        rep.add("NO_SCENARIO", "instance has no scenarios")
    for s in inst.scenarios:
        if not _finite(s.probability) or s.probability <= 0:
            rep.add("PROB_POS", f"scenario {s.id} probability {s.probability} is not positive",
                    scenario=s.id)
    total = sum(p for p in probs if _finite(p))
    if inst.scenarios and abs(total - 1.0) > 1e-9:
        rep.add("PROB_SUM", f"scenario probabilities sum to {total:.12g}, expected 1",
                measured=total)

    zones = {z.id for z in inst.zones}
    scen = {s.id for s in inst.scenarios}
    if not inst.zones:
        rep.add("NO_ZONE", "instance has no zones")

    # resources
    for r in inst.resources:
        if r.kind not in RESOURCE_KINDS:
            rep.add("KIND", f"resource {r.id} has unknown kind {r.kind!r}", resource=r.id)
        if r.zone not in zones:
            rep.add("ZONE_REF", f"resource {r.id} references unknown zone {r.zone!r}",
                    resource=r.id)
        numeric = {
            "existing_mw": r.existing_mw, "max_build_mw": r.max_build_mw,
            "max_retire_mw": r.max_retire_mw, "unit_size_mw": r.unit_size_mw,
            "inv_cost": r.inv_cost, "fom_cost": r.fom_cost, "retire_cost": r.retire_cost,
            "var_cost": r.var_cost, "startup_cost": r.startup_cost, "co2_rate": r.co2_rate,
            "ramp_rate": r.ramp_rate, "min_stable": r.min_stable,
        }
        for name, v in numeric.items():
            if not _finite(v):
                rep.add("NONFINITE", f"resource {r.id} field {name} is not finite",
                        resource=r.id, field=name)
            elif v < 0:
                code = "GAMMA_NEG" if name == "co2_rate" else "NEGATIVE"
                rep.add(code, f"resource {r.id} field {name} = {v} is negative",
                        resource=r.id, field=name)
        if _finite(r.unit_size_mw) and r.unit_size_mw <= 0:
            rep.add("NEGATIVE", f"resource {r.id} unit size must be positive", resource=r.id)
        if _finite(r.ramp_rate) and not 0 < r.ramp_rate <= 1:
            rep.add("FRACTION_RANGE", f"resource {r.id} ramp rate {r.ramp_rate} not in (0,1]",
                    resource=r.id)
        if _finite(r.min_stable) and not 0 <= r.min_stable <= 1:
            rep.add("FRACTION_RANGE", f"resource {r.id} min stable output {r.min_stable} not in [0,1]",
                    resource=r.id)
        storage_fields = {
            "eta_self": r.eta_self, "eta_charge": r.eta_charge,
            "eta_discharge": r.eta_discharge, "energy_ratio": r.energy_ratio,
        }
        if r.kind in STORAGE_KINDS:
            for name, v in storage_fields.items():
                if v is None:
                    rep.add("KIND_PARAMS", f"storage resource {r.id} is missing {name}",
                            resource=r.id, field=name)
                elif not _finite(v):
                    rep.add("NONFINITE", f"resource {r.id} field {name} is not finite",
                            resource=r.id, field=name)
            for name in ("eta_charge", "eta_discharge"):
                v = storage_fields[name]
                if _finite(v) and not 0 < v <= 1:
                    rep.add("EFF_RANGE", f"resource {r.id} {name} = {v} outside (0, 1]",
                            resource=r.id, field=name, value=v)
            if _finite(r.eta_self) and not 0 <= r.eta_self < 1:
                rep.add("EFF_RANGE", f"resource {r.id} eta_self = {r.eta_self} outside [0, 1)",
                        resource=r.id, field="eta_self", value=r.eta_self)
            if _finite(r.energy_ratio) and r.energy_ratio <= 0:
                rep.add("KIND_PARAMS", f"resource {r.id} energy ratio must be positive",
                        resource=r.id)
        elif r.kind in RESOURCE_KINDS:
            for name, v in storage_fields.items():
                if v is not None:
                    rep.add("KIND_PARAMS", f"non-storage resource {r.id} sets {name}",
                            resource=r.id, field=name)

    # links
    for l in inst.links:
        if l.from_zone not in zones or l.to_zone not in zones:
            rep.add("LINK_REF", f"link {l.id} references an unknown zone", link=l.id)
        if l.from_zone == l.to_zone:
            rep.add("LINK_REF", f"link {l.id} connects zone {l.from_zone} to itself", link=l.id)
        for name in ("existing_mw", "max_build_mw", "inv_cost", "fom_cost", "loss"):
            v = getattr(l, name)
            if not _finite(v):
                rep.add("NONFINITE", f"link {l.id} field {name} is not finite", link=l.id)
            elif v < 0:
                rep.add("NEGATIVE", f"link {l.id} field {name} is negative", link=l.id)
        if _finite(l.loss) and not 0 <= l.loss < 1:
            rep.add("EFF_RANGE", f"link {l.id} loss {l.loss} outside [0, 1)", link=l.id)

    # periods, sub-periods, series
    if not inst.periods:
        rep.add("NO_PERIOD", "instance has no planning periods")
    hours = {w.hours for w in inst.subperiods}
    if len(hours) > 1:
        rep.add("HOURS_MISMATCH", f"sub-periods have differing lengths {sorted(hours)}",
                lengths=sorted(hours))
    vre = [r.id for r in inst.resources if r.kind == VRE]
    hydro = [r.id for r in inst.resources if r.kind == HYDRO]
    for p in inst.periods:
        for name in ("fixed_cost_factor", "variable_cost_factor"):
            v = getattr(p, name)
            if not _finite(v) or v < 0:
                rep.add("NONFINITE", f"period {p.id} {name} must be finite and nonnegative",
                        period=p.id)
        for s in inst.scenarios:
            if not p.subperiods_of(s.id):
                rep.add("PERIOD_PARTITION", f"period {p.id} has no sub-period for scenario {s.id}",
                        period=p.id, scenario=s.id)
        for w in p.subperiods:
            if not isinstance(w.id, int) or isinstance(w.id, bool):
                rep.add("SUBPERIOD_ID", f"sub-period id {w.id!r} is not an integer")
            if w.hours < 1:
                rep.add("HOURS_MISMATCH", f"sub-period {w.id} has no hours", subperiod=w.id)
            if w.scenario not in scen:
                rep.add("SCENARIO_REF", f"sub-period {w.id} references unknown scenario {w.scenario!r}",
                        subperiod=w.id)
            _check_series(rep, w, "demand", w.demand, sorted(zones), lo=0.0, hi=math.inf,
                          code="DEMAND_NEG")
            _check_series(rep, w, "availability", w.availability, vre, lo=0.0, hi=1.0,
                          code="AVAIL_RANGE")
            _check_series(rep, w, "inflow", w.inflow, hydro, lo=0.0, hi=math.inf,
                          code="INFLOW_NEG")

    # policies
    periods = {p.id for p in inst.periods}
    for q in inst.policies:
        if q.kind not in POLICY_KINDS:
            rep.add("POLICY_KIND", f"policy {q.id} has unknown kind {q.kind!r}", policy=q.id)
        if not _finite(q.target) or q.target < 0:
            rep.add("POLICY_CAP", f"policy {q.id} target {q.target} must be >= 0", policy=q.id)
        if q.kind == MIN_SHARE and _finite(q.target) and q.target > 1:
            rep.add("POLICY_CAP", f"policy {q.id} share {q.target} exceeds 1", policy=q.id)
        if not _finite(q.penalty) or q.penalty <= 0:
            rep.add("POLICY_PENALTY", f"policy {q.id} penalty must be positive", policy=q.id)
        if not q.scope:
            rep.add("POLICY_SCOPE", f"policy {q.id} has an empty scope", policy=q.id)
        for p_id, s_id in q.scope:
            if p_id not in periods or s_id not in scen:
                rep.add("POLICY_SCOPE", f"policy {q.id} scope ({p_id}, {s_id}) is unknown",
                        policy=q.id)

    # penalties
    pen = inst.penalties
    for name, v in (("co2_penalty", pen.co2_penalty), ("nse_cost", pen.nse_cost),
                    ("mds_boundary_penalty", pen.mds_penalty)):
        if not _finite(v) or v <= 0:
            rep.add("PENALTY_NONPOS", f"penalty {name} must be positive", field=name)

    # discrete indices
    res_ids = {r.id for r in inst.resources}
    link_ids = {l.id for l in inst.links}
    for item in inst.discrete:
        fam, _, ent = item.partition(":")
        ok = (fam in ("new", "ret") and ent in res_ids) or (fam == "tnew" and ent in link_ids)
        if fam not in DISCRETE_FAMILIES or not ok:
            rep.add("DISCRETE_REF", f"discrete index {item!r} does not name a planning variable",
                    item=item)
    return rep


def _check_series(rep, w, label, series, required, lo, hi, code):
    for ent in required:
        if ent not in series:
            rep.add("SERIES_MISSING", f"sub-period {w.id} lacks {label} series for {ent}",
                    subperiod=w.id, entity=ent)
    for ent, vals in series.items():
        if ent not in required:
            rep.add("SERIES_REF", f"sub-period {w.id} {label} series for unknown entity {ent}",
                    subperiod=w.id, entity=ent)
        if len(vals) != w.hours:
            rep.add("SERIES_LENGTH", f"sub-period {w.id} {label} series for {ent} has {len(vals)} "
                    f"values, expected {w.hours}", subperiod=w.id, entity=ent)
        for v in vals:
            if not _finite(v):
                rep.add("NONFINITE", f"sub-period {w.id} {label} series for {ent} is not finite",
                        subperiod=w.id, entity=ent)
                break
            if v < lo or v > hi:
                rep.add(code, f"sub-period {w.id} {label} value {v} for {ent} outside [{lo}, {hi}]",
                        subperiod=w.id, entity=ent, value=v)
                break
