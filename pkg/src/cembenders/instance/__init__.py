"""Instance schema, validation, synthetic generation and file format."""

from .io import dumps_instance, instance_hash, load_instance, save_instance
from .model import (
    CLEAN_KINDS, CO2_CAP, DISCRETE_FAMILIES, HYDRO, MDS_KINDS, MDS_STORAGE, MIN_SHARE,
    POLICY_KINDS, RESOURCE_KINDS, SHORT_STORAGE, STORAGE_KINDS, THERMAL, VRE, CEMInstance,
    PenaltyConfig, PlanningPeriod, Policy, Resource, Scenario, SubPeriod, TransmissionLink, Zone,
)
from .synthetic import PRESETS, GeneratorSpec, generate_synthetic, preset
from .validation import Issue, ValidationReport, validate_instance

__all__ = [
    "dumps_instance", "instance_hash", "load_instance", "save_instance",
    "CLEAN_KINDS", "CO2_CAP", "DISCRETE_FAMILIES", "HYDRO", "MDS_KINDS", "MDS_STORAGE",
    "MIN_SHARE", "POLICY_KINDS", "RESOURCE_KINDS", "SHORT_STORAGE", "STORAGE_KINDS",
    "THERMAL", "VRE", "CEMInstance", "PenaltyConfig", "PlanningPeriod", "Policy", "Resource",
    "Scenario", "SubPeriod", "TransmissionLink", "Zone", "PRESETS", "GeneratorSpec",
    "generate_synthetic", "preset", "Issue", "ValidationReport", "validate_instance",
]
