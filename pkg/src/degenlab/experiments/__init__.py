"""Declarative experiment runs: configs, scenarios, deterministic
measurements, CSV reports, and the command-line interface."""

from .config import ConfigMap, parse_config, parse_config_text
from .io import Table, read_table, write_table
from .prng import SplitMix64
from .runner import (Report, ToleranceCheck, execute, load_scenario,
                     refine, render_report, run, sweep_eps, write_report)
from .scenarios import (MEASUREMENTS, MeasurementResult, RunContext,
                        Scenario, build_scenario, bundled_config_text,
                        bundled_names, reference_field, trial_field,
                        validate)

__all__ = [
    "ConfigMap", "parse_config", "parse_config_text",
    "Table", "read_table", "write_table",
    "SplitMix64",
    "Report", "ToleranceCheck", "execute", "load_scenario", "refine",
    "render_report", "run", "sweep_eps", "write_report",
    "MEASUREMENTS", "MeasurementResult", "RunContext", "Scenario",
    "build_scenario", "bundled_config_text", "bundled_names",
    "reference_field", "trial_field", "validate",
]
