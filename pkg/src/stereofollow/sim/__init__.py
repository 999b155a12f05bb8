"""Deterministic desk-scale stand-in for the physical following experiments."""
from .runner import RunResult, run_scenario
from .scenario import Scenario, apply_overrides, builtin_scenarios, load_scenario, scenario_from_dict
from .world import (
    BodyGeometry,
    LightingSchedule,
    NoiseModel,
    PersonModel,
    RobotState,
    World,
    keypoint_visibility,
    render_detections,
    step_world,
)

__all__ = [
    "BodyGeometry",
    "LightingSchedule",
    "NoiseModel",
    "PersonModel",
    "RobotState",
    "RunResult",
    "Scenario",
    "World",
    "apply_overrides",
    "builtin_scenarios",
    "keypoint_visibility",
    "load_scenario",
    "render_detections",
    "run_scenario",
    "scenario_from_dict",
    "step_world",
]
