"""Packet-level fabric simulator."""

from .topology import Topology, build_fat_tree
from .scenario import (Scenario, ScenarioError, load_scenario,
                       scenario_from_dict, validate)
from .engine import DeadlockError, kernel_backend, run_scenario

__all__ = [
    "Topology", "build_fat_tree",
    "Scenario", "ScenarioError", "load_scenario", "scenario_from_dict",
    "validate", "DeadlockError", "kernel_backend", "run_scenario",
]
