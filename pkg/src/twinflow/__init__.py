"""Two-timescale simulator for twin-assisted model retraining at the network edge."""
from .config import AccuracyModel, AgentConfig, ScenarioConfig, config_from_dict, validate_config
from .sim import SchemeKind, run_simulation, summarize

__version__ = "0.1.0"
__all__ = ["AccuracyModel", "AgentConfig", "ScenarioConfig", "config_from_dict", "validate_config",
           "SchemeKind", "run_simulation", "summarize"]
