from .config import (ScenarioConfig, SweepSpec, SweepAxis, SWEEP_AXES,
                     load_scenario, load_sweep, validate_scenario)
from .runner import Simulation, ScenarioRunner, build_backend, build_policy, load_model_profile
from .sweep import RESULT_COLUMNS, run_sweep, run_point, sweep_grid, write_sweep_csv
from .main import cli

__all__ = ["ScenarioConfig", "SweepSpec", "SweepAxis", "SWEEP_AXES",
           "load_scenario", "load_sweep", "validate_scenario",
           "Simulation", "ScenarioRunner", "build_backend", "build_policy", "load_model_profile",
           "RESULT_COLUMNS", "run_sweep", "run_point", "sweep_grid", "write_sweep_csv",
           "cli"]
