"""Immutable description of a capacity-expansion planning instance.

Units: power in MW, energy in MWh, emissions in tons, money in a single
currency.  Fixed costs are per MW over the modelled horizon of a period;
variable costs are per MWh.  Hours inside a sub-period are numbered
``0 .. H-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

THERMAL = "thermal-uc-linear"
VRE = "vre"
SHORT_STORAGE = "short-storage"
MDS_STORAGE = "mds-storage"
HYDRO = "reservoir-hydro"

RESOURCE_KINDS = (THERMAL, VRE, SHORT_STORAGE, MDS_STORAGE, HYDRO)
STORAGE_KINDS = (SHORT_STORAGE, MDS_STORAGE, HYDRO)
MDS_KINDS = (MDS_STORAGE, HYDRO)
CLEAN_KINDS = (VRE, HYDRO)

CO2_CAP = "co2-cap"
MIN_SHARE = "min-share"
POLICY_KINDS = (CO2_CAP, MIN_SHARE)

# Planning-variable families a discrete index may point at.
DISCRETE_FAMILIES = ("new", "ret", "tnew")


@dataclass(frozen=True)
class Zone:
    id: str


@dataclass(frozen=True)
class Resource:
    id: str
    zone: str
    kind: str
    existing_mw: float = 0.0
    max_build_mw: float = 0.0
    max_retire_mw: float = 0.0
    unit_size_mw: float = 1.0
    inv_cost: float = 0.0
    fom_cost: float = 0.0
    retire_cost: float = 0.0
    var_cost: float = 0.0
    startup_cost: float = 0.0
    co2_rate: float = 0.0
    ramp_rate: float = 1.0
    min_stable: float = 0.0
    eta_self: float | None = None
    eta_charge: float | None = None
    eta_discharge: float | None = None
    energy_ratio: float | None = None

    @property
    def is_storage(self) -> bool:
        return self.kind in STORAGE_KINDS

    @property
    def is_mds(self) -> bool:
        return self.kind in MDS_KINDS


@dataclass(frozen=True)
class TransmissionLink:
    id: str
    from_zone: str
    to_zone: str
    existing_mw: float = 0.0
    max_build_mw: float = 0.0
    inv_cost: float = 0.0
    fom_cost: float = 0.0
    loss: float = 0.0


@dataclass(frozen=True)
class SubPeriod:
    """One operational block (e.g. a week) of ``hours`` consecutive hours."""

    id: int
    scenario: str
    hours: int
    demand: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    availability: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    inflow: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    @property
    def t_first(self) -> int:
        return 0

    @property
    def t_last(self) -> int:
        return self.hours - 1


@dataclass(frozen=True)
class PlanningPeriod:
    id: int
    subperiods: tuple[SubPeriod, ...]
    fixed_cost_factor: float = 1.0
    variable_cost_factor: float = 1.0

    def subperiods_of(self, scenario: str) -> tuple[SubPeriod, ...]:
        return tuple(w for w in self.subperiods if w.scenario == scenario)


@dataclass(frozen=True)
class Scenario:
    id: str
    probability: float


@dataclass(frozen=True)
class Policy:
    """Emission cap (``target`` in tons) or minimum clean share (``target`` a fraction)."""

    id: str
    kind: str
    scope: tuple[tuple[int, str], ...]
    target: float
    penalty: float


@dataclass(frozen=True)
class PenaltyConfig:
    co2_penalty: float = 150.0
    nse_cost: float = 2000.0
    mds_boundary_penalty: float | None = None

    @property
    def mds_penalty(self) -> float:
        if self.mds_boundary_penalty is None:
            return 2.0 * self.nse_cost
        return self.mds_boundary_penalty


@dataclass(frozen=True)
class CEMInstance:
    name: str
    periods: tuple[PlanningPeriod, ...]
    scenarios: tuple[Scenario, ...]
    zones: tuple[Zone, ...]
    resources: tuple[Resource, ...]
    links: tuple[TransmissionLink, ...] = ()
    policies: tuple[Policy, ...] = ()
    discrete: tuple[str, ...] = ()  # "family:entity", e.g. "new:gas1"
    penalties: PenaltyConfig = PenaltyConfig()
    mds_wrap: bool = True

    @property
    def subperiods(self) -> tuple[SubPeriod, ...]:
        return tuple(w for p in self.periods for w in p.subperiods)

    def period_of(self, w_id: int) -> PlanningPeriod:
        for p in self.periods:
            if any(w.id == w_id for w in p.subperiods):
                return p
        raise KeyError(w_id)

    def subperiod(self, w_id: int) -> SubPeriod:
        for w in self.subperiods:
            if w.id == w_id:
                return w
        raise KeyError(w_id)

    def probability(self, scenario: str) -> float:
        for s in self.scenarios:
            if s.id == scenario:
                return s.probability
        raise KeyError(scenario)

    def resource(self, rid: str) -> Resource:
        for r in self.resources:
            if r.id == rid:
                return r
        raise KeyError(rid)

    @property
    def hours(self) -> int:
        return self.subperiods[0].hours if self.subperiods else 0

    def replace(self, **changes) -> "CEMInstance":
        from dataclasses import replace

        return replace(self, **changes)
