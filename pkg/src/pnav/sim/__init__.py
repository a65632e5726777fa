"""Deterministic robot simulation: plant, sensors, localizer, governor, scenarios."""

from .governor import synthesize_utilization, udvfs_governor
from .localizer import Localizer, init_localizer, localizer_step, resize
from .robot import RobotState, advance_pose, integrate_kinematics
from .scenario import (
    BASELINE_NAV_PARAMS,
    CalibrationBundle,
    MetricsSample,
    Policy,
    ScenarioAbort,
    ScenarioResult,
    ScenarioSpec,
    parse_scenario,
    parse_scenario_text,
    run_scenario,
)
from .sensors import simulate_scan

__all__ = [
    "synthesize_utilization",
    "udvfs_governor",
    "Localizer",
    "init_localizer",
    "localizer_step",
    "resize",
    "RobotState",
    "advance_pose",
    "integrate_kinematics",
    "BASELINE_NAV_PARAMS",
    "CalibrationBundle",
    "MetricsSample",
    "Policy",
    "ScenarioAbort",
    "ScenarioResult",
    "ScenarioSpec",
    "parse_scenario",
    "parse_scenario_text",
    "run_scenario",
    "simulate_scan",
]
