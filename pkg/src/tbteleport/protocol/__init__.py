from .config import NodeConfig, PRESETS, apply_override, from_dict, load_scenario, to_dict
from .model import LinkModel, evaluate, fourfold_classes
from .simulate import (ExperimentResult, TeleportationEvent, assemble_events, channel_delays,
                       herald_and_sync_tags, run_experiment, run_pulse)

__all__ = [
    "ExperimentResult", "LinkModel", "NodeConfig", "PRESETS", "TeleportationEvent",
    "apply_override", "assemble_events", "channel_delays", "evaluate", "fourfold_classes",
    "from_dict", "herald_and_sync_tags", "load_scenario", "run_experiment", "run_pulse",
    "to_dict",
]
