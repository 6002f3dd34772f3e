"""Simulation and analysis of time-bin quantum teleportation across a three-node fiber link."""

from .protocol import LinkModel, NodeConfig, load_scenario, run_experiment
from .qstate import BellState, DensityMatrix, TimeBinQubit, fidelity

__version__ = "0.1.0"

__all__ = [
    "BellState", "DensityMatrix", "LinkModel", "NodeConfig", "TimeBinQubit", "fidelity",
    "load_scenario", "run_experiment",
]
