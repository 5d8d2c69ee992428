"""Scenario configuration, execution and output."""
from .config import (BUILTIN_SCENARIOS, TABLE1_REFERENCE, ScenarioConfig, build_config,
                     config_hash, load_scenario, parse_config_text)
from .emit import CSV_HEADER, emit, render
from .runner import (SweepResult, SweepRow, coincidence_report, count_local_maxima, mode_report,
                     optimize_bandwidth, run_scenario, sweep, table1)

__all__ = [
    "BUILTIN_SCENARIOS", "CSV_HEADER", "ScenarioConfig", "SweepResult", "SweepRow",
    "TABLE1_REFERENCE", "build_config", "coincidence_report", "config_hash",
    "count_local_maxima", "emit", "load_scenario", "mode_report", "optimize_bandwidth",
    "parse_config_text", "render", "run_scenario", "sweep", "table1",
]
