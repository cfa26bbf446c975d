"""Scenario configs, application planners, the runner and the command line."""

from .apps import build_fibration_planner, build_workmap_planner
from .config import ScenarioConfig, bundled_names, load_config, parse_config_text
from .runner import ScenarioReport, build_planner, export_report, run_scenario, tc_torus_planner

__all__ = [
    "ScenarioConfig", "ScenarioReport", "build_fibration_planner", "build_workmap_planner",
    "build_planner", "bundled_names", "export_report", "load_config", "parse_config_text",
    "run_scenario", "tc_torus_planner",
]
