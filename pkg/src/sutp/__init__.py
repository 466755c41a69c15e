"""Scheduling the unloading of trains in bulk ports with constraint programming."""

from sutp.domain import (
    BigTrain,
    Conveyor,
    Dumper,
    EquipmentFlow,
    Instance,
    PortTopology,
    Stacker,
    Stockpile,
    UnitTrain,
)
from sutp.reference_port import build_reference_port
from sutp.topology import enumerate_feasible_paths, max_unit_capacity_flow, naive_upper_bound

__version__ = "0.1.0"

__all__ = [
    "BigTrain",
    "Conveyor",
    "Dumper",
    "EquipmentFlow",
    "Instance",
    "PortTopology",
    "Stacker",
    "Stockpile",
    "UnitTrain",
    "build_reference_port",
    "enumerate_feasible_paths",
    "max_unit_capacity_flow",
    "naive_upper_bound",
]
