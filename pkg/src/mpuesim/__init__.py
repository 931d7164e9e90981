"""System-level mobility simulator for FR2 multi-panel UEs."""

from .engine import ControlPlane, RunHandle, Simulation, SweepSpec, run_simulation, run_sweep
from .kpi import KpiReport, replay_events
from .scenario import ConfigError, ScenarioConfig, build_deployment, load_config

__all__ = [
    "ConfigError", "ControlPlane", "KpiReport", "RunHandle", "ScenarioConfig", "Simulation", "SweepSpec",
    "build_deployment", "load_config", "replay_events", "run_simulation", "run_sweep",
]
__version__ = "0.1.0"
