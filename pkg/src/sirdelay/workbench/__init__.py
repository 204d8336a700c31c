"""Scenario ingestion, built-in examples, runs and the command line."""

from .builtins import DELAY_PRESETS, RATE_PRESETS, builtin_names, builtin_scenarios, get_builtin
from .scenario import Scenario, dump_scenario, load_scenario, load_scenario_file

__all__ = ["DELAY_PRESETS", "RATE_PRESETS", "Scenario", "builtin_names", "builtin_scenarios",
           "dump_scenario", "get_builtin", "load_scenario", "load_scenario_file"]
