"""Seeded synthetic instances.

Series are bounded sinusoid-plus-noise profiles; every draw comes from one
``numpy.random.Generator`` seeded with the caller's seed, so a (spec, seed)
pair always yields the same instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SpecInvalid
from .model import (
    CO2_CAP, HYDRO, MDS_STORAGE, MIN_SHARE, RESOURCE_KINDS, SHORT_STORAGE, THERMAL, VRE,
    CEMInstance, PenaltyConfig, PlanningPeriod, Policy, Resource, Scenario, SubPeriod,
    TransmissionLink, Zone,
)


@dataclass(frozen=True)
class GeneratorSpec:
    zones: int = 1
    resources: dict = field(default_factory=lambda: {THERMAL: 1, MDS_STORAGE: 1})
    periods: int = 1
    scenarios: int = 1
    subperiods: int = 2  # per scenario and period
    hours: int = 4
    demand_growth: float = 0.0  # per period, multiplies the demand series
    cost_decline: float = 0.0  # per period, multiplies fixed costs
    co2_cap_fraction: float = 0.5  # cap as a share of a demand-weighted emission estimate
    min_share: float | None = None  # adds a clean-energy share policy when set
    discrete: tuple[str, ...] = ()  # resource kinds whose new builds are integer
    nse_cost: float = 2000.0
    co2_penalty: float = 150.0

    def validate(self) -> None:
        counts = {
            "zones": self.zones, "periods": self.periods, "scenarios": self.scenarios,
            "subperiods": self.subperiods, "hours": self.hours,
        }
        for name, v in counts.items():
            if not isinstance(v, (int, np.integer)) or v <= 0:
                raise SpecInvalid(f"generator count {name} must be a positive integer, got {v!r}",
                                  field=name)
        if not self.resources:
            raise SpecInvalid("generator needs at least one resource kind", field="resources")
        for kind, n in self.resources.items():
            if kind not in RESOURCE_KINDS:
                raise SpecInvalid(f"unknown resource kind {kind!r}", field="resources")
            if not isinstance(n, (int, np.integer)) or n <= 0:
                raise SpecInvalid(f"resource count for {kind} must be a positive integer, got {n!r}",
                                  field="resources")
        for kind in self.discrete:
            if kind not in RESOURCE_KINDS:
                raise SpecInvalid(f"unknown discrete kind {kind!r}", field="discrete")


PRESETS = {
    "tiny": GeneratorSpec(),
    "tiny-int": GeneratorSpec(discrete=(THERMAL, MDS_STORAGE)),
    "desk": GeneratorSpec(
        zones=2,
        resources={THERMAL: 2, VRE: 1, SHORT_STORAGE: 1, MDS_STORAGE: 1, HYDRO: 1},
        periods=2, scenarios=2, subperiods=2, hours=6,
        demand_growth=0.1, cost_decline=0.1,
    ),
    "small": GeneratorSpec(
        zones=3,
        resources={THERMAL: 3, VRE: 3, SHORT_STORAGE: 2, MDS_STORAGE: 1, HYDRO: 1},
        periods=2, scenarios=2, subperiods=4, hours=24,
        demand_growth=0.1, cost_decline=0.1,
    ),
}


def preset(name: str) -> GeneratorSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise SpecInvalid(f"unknown generator preset {name!r}; choose from {sorted(PRESETS)}") from None


def _r(x: float) -> float:
    # Rounded values keep the text serialisation short and exact.
    return float(round(float(x), 6))


def generate_synthetic(spec: GeneratorSpec, seed: int) -> CEMInstance:
    spec.validate()
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    H = int(spec.hours)
    n_sub_total = spec.subperiods
    horizon_hours = H * n_sub_total

    zones = tuple(Zone(f"z{i + 1}") for i in range(spec.zones))

    resources = []
    idx = 0
    for kind in RESOURCE_KINDS:
        for k in range(int(spec.resources.get(kind, 0))):
            zone = zones[idx % len(zones)].id
            idx += 1
            resources.append(_resource(kind, f"{_PREFIX[kind]}{k + 1}", zone, k, rng, horizon_hours))
    resources = tuple(resources)

    links = []
    for i in range(len(zones) - 1):
        links.append(TransmissionLink(
            id=f"l{i + 1}", from_zone=zones[i].id, to_zone=zones[i + 1].id,
            existing_mw=_r(rng.uniform(10, 40)), max_build_mw=100.0,
            inv_cost=_r(rng.uniform(4, 8) * horizon_hours), fom_cost=_r(0.5 * horizon_hours),
            loss=_r(rng.uniform(0.01, 0.05)),
        ))
    if len(zones) > 2:
        links.append(TransmissionLink(
            id=f"l{len(zones)}", from_zone=zones[-1].id, to_zone=zones[0].id,
            existing_mw=0.0, max_build_mw=100.0, inv_cost=_r(rng.uniform(6, 10) * horizon_hours),
            fom_cost=_r(0.5 * horizon_hours), loss=_r(rng.uniform(0.02, 0.06)),
        ))

    scenarios = tuple(Scenario(f"s{i + 1}", _r(1.0 / spec.scenarios)) for i in range(spec.scenarios))
    if spec.scenarios > 1:
        # fix rounding so the probabilities sum to one exactly
        head = [s.probability for s in scenarios[:-1]]
        scenarios = scenarios[:-1] + (Scenario(scenarios[-1].id, 1.0 - sum(head)),)

    base_demand = {z.id: rng.uniform(60, 120) for z in zones}
    phase = {r.id: rng.uniform(0, 2 * math.pi) for r in resources if r.kind == VRE}
    periods = []
    wid = 1
    for p in range(spec.periods):
        growth = (1.0 + spec.demand_growth) ** p
        subs = []
        for s in scenarios:
            for _ in range(spec.subperiods):
                level = rng.uniform(0.8, 1.2)
                hours = np.arange(H)
                demand = {}
                for z in zones:
                    shape = 1.0 + 0.25 * np.sin(2 * math.pi * (hours - 6) / 24.0)
                    noise = rng.uniform(-0.05, 0.05, size=H)
                    vals = np.clip(base_demand[z.id] * growth * level * (shape + noise), 0.0, None)
                    demand[z.id] = tuple(_r(v) for v in vals)
                avail = {}
                for r in resources:
                    if r.kind != VRE:
                        continue
                    cf = 0.35 + 0.3 * np.sin(2 * math.pi * hours / 24.0 + phase[r.id])
                    cf = cf * rng.uniform(0.6, 1.2) + rng.uniform(-0.1, 0.1, size=H)
                    avail[r.id] = tuple(_r(v) for v in np.clip(cf, 0.0, 1.0))
                inflow = {}
                for r in resources:
                    if r.kind != HYDRO:
                        continue
                    mean = rng.uniform(0.2, 0.6) * r.existing_mw
                    vals = mean * (1.0 + 0.2 * rng.uniform(-1, 1, size=H))
                    inflow[r.id] = tuple(_r(v) for v in np.clip(vals, 0.0, None))
                subs.append(SubPeriod(wid, s.id, H, demand, avail, inflow))
                wid += 1
        periods.append(PlanningPeriod(
            id=p, subperiods=tuple(subs),
            fixed_cost_factor=_r((1.0 - spec.cost_decline) ** p), variable_cost_factor=1.0,
        ))
    periods = tuple(periods)

    policies = []
    scope = tuple((p.id, s.id) for p in periods for s in scenarios)
    if spec.co2_cap_fraction is not None and any(r.co2_rate > 0 for r in resources):
        # cap sized against the mean demand of one scenario in one period
        energy = sum(sum(sum(v) for v in w.demand.values()) for w in periods[0].subperiods_of(scenarios[0].id))
        policies.append(Policy("co2", CO2_CAP, scope, _r(spec.co2_cap_fraction * 0.5 * energy),
                               spec.co2_penalty))
    if spec.min_share is not None:
        policies.append(Policy("rps", MIN_SHARE, scope, _r(spec.min_share), 2.0 * spec.co2_penalty))

    discrete = tuple(f"new:{r.id}" for r in resources if r.kind in spec.discrete and r.max_build_mw > 0)
    return CEMInstance(
        name=f"synthetic-{seed}",
        periods=periods,
        scenarios=scenarios,
        zones=zones,
        resources=resources,
        links=tuple(links),
        policies=tuple(policies),
        discrete=discrete,
        penalties=PenaltyConfig(co2_penalty=spec.co2_penalty, nse_cost=spec.nse_cost),
    )


_PREFIX = {THERMAL: "gas", VRE: "wind", SHORT_STORAGE: "bat", MDS_STORAGE: "ldes", HYDRO: "hyd"}


def _resource(kind: str, rid: str, zone: str, k: int, rng, horizon_hours: int) -> Resource:
    u = rng.uniform
    if kind == THERMAL:
        return Resource(
            rid, zone, kind,
            existing_mw=_r(u(20, 60)) if k == 0 else 0.0,
            max_build_mw=200.0, max_retire_mw=_r(u(20, 60)) if k == 0 else 0.0,
            unit_size_mw=20.0,
            inv_cost=_r(u(12, 20) * horizon_hours), fom_cost=_r(u(2, 4) * horizon_hours),
            retire_cost=0.0, var_cost=_r(u(25, 60)), startup_cost=_r(u(20, 60)),
            co2_rate=_r(u(0.35, 0.9)), ramp_rate=_r(u(0.3, 0.8)), min_stable=_r(u(0.2, 0.4)),
        )
    if kind == VRE:
        return Resource(
            rid, zone, kind, max_build_mw=300.0, unit_size_mw=10.0,
            inv_cost=_r(u(6, 12) * horizon_hours), fom_cost=_r(u(0.5, 1.0) * horizon_hours),
            var_cost=0.0,
        )
    if kind == SHORT_STORAGE:
        return Resource(
            rid, zone, kind, max_build_mw=100.0, unit_size_mw=10.0,
            inv_cost=_r(u(5, 9) * horizon_hours), fom_cost=_r(u(0.5, 1.0) * horizon_hours),
            var_cost=_r(u(0.5, 2.0)),
            eta_self=_r(u(0.0, 0.005)), eta_charge=_r(u(0.9, 0.95)), eta_discharge=_r(u(0.9, 0.95)),
            energy_ratio=4.0,
        )
    if kind == MDS_STORAGE:
        return Resource(
            rid, zone, kind, max_build_mw=100.0, unit_size_mw=10.0,
            inv_cost=_r(u(8, 14) * horizon_hours), fom_cost=_r(u(0.5, 1.5) * horizon_hours),
            var_cost=_r(u(0.5, 2.0)),
            eta_self=_r(u(0.0, 0.002)), eta_charge=_r(u(0.7, 0.85)), eta_discharge=_r(u(0.7, 0.85)),
            energy_ratio=_r(u(24, 72)),
        )
    if kind == HYDRO:
        return Resource(
            rid, zone, kind, existing_mw=_r(u(30, 60)), max_build_mw=0.0,
            max_retire_mw=0.0, unit_size_mw=10.0,
            inv_cost=_r(u(10, 20) * horizon_hours), fom_cost=_r(u(0.5, 1.0) * horizon_hours),
            var_cost=_r(u(0.5, 1.0)),
            eta_self=0.0, eta_charge=1.0, eta_discharge=_r(u(0.85, 0.95)),
            energy_ratio=_r(u(100, 200)),
        )
    raise SpecInvalid(f"unknown resource kind {kind!r}")
