"""Closed-loop scenario runs: render -> identify -> fuse -> track -> control -> move."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..detection import Camera, KeypointFrame
from ..pipeline import FollowPipeline, FrameResult
from ..trace import Trace, TraceRecord
from ..tracker import score_detections
from .scenario import Scenario, load_template
from .world import World, render_detections, step_world, true_target_depth


@dataclass
class RunResult:
    trace: Trace
    frames: dict[Camera, list[KeypointFrame]] = field(default_factory=dict)
    robot_path: list[tuple[float, float, float]] = field(default_factory=list)


def make_world(scenario: Scenario) -> World:
    return World(
        t=0.0,
        robot=scenario.robot,
        persons=scenario.persons,
        lighting=scenario.lighting,
        mount_height_m=scenario.mount_height_m,
        rng=np.random.default_rng([scenario.seed, 0]),
    )


def _target_similarity(dets, pipeline: FollowPipeline, target_id: str | None):
    if target_id is None or pipeline.template is None:
        return None
    mine = [d for d in dets if d.person_id == target_id]
    if not mine:
        return None
    scored = score_detections(mine, pipeline.template, pipeline.tracker_cfg.min_saturation)
    return None if scored[0] is None else scored[0][2]


def chosen_identity(result: FrameResult) -> str | None:
    left, right = result.chosen[Camera.LEFT], result.chosen[Camera.RIGHT]
    if left is None or right is None:
        return None
    a, b = left.detection.person_id, right.detection.person_id
    if a is None or b is None:
        return None
    return a if a == b else f"{a}|{b}"


def record_from_result(result: FrameResult, true_distance: float | None = None) -> TraceRecord:
    tracking = result.track.mode.value == "TRACKING"
    m = result.track.last_measurement if tracking else None
    left, right = result.chosen[Camera.LEFT], result.chosen[Camera.RIGHT]
    return TraceRecord(
        t_s=result.t,
        track_mode=result.track.mode.value,
        v_cmd=result.command.v,
        w_cmd=result.command.w,
        engaged=result.command.engaged,
        estimated_z_m=None if m is None else m.z_m,
        bearing_rad=None if m is None else m.bearing_rad,
        similarity_left=None if left is None else left.similarity,
        similarity_right=None if right is None else right.similarity,
        true_distance_m=true_distance,
        chosen_id=chosen_identity(result) if tracking else None,
    )


def run_scenario(scenario: Scenario, record_detections: bool = False) -> RunResult:
    """Run the closed loop for ``scenario.n_frames`` frames at period ``scenario.dt``.

    Output is a pure function of the scenario (including its seed).
    """
    template = load_template(scenario.template, scenario)
    pipeline = FollowPipeline(
        scenario.rig, template, scenario.tracker, scenario.gains, scenario.controller
    )
    world = make_world(scenario)
    trace = Trace(target_id=scenario.target_id)
    frames: dict[Camera, list[KeypointFrame]] = {Camera.LEFT: [], Camera.RIGHT: []}
    path = []
    dt = scenario.dt
    for k in range(scenario.n_frames):
        # time from the frame index, not by accumulation, so t_s is exact and strictly increasing
        world = replace(world, t=k * dt)
        dets = render_detections(world, scenario.rig, scenario.noise, frame_index=k)
        if record_detections:
            for cam in (Camera.LEFT, Camera.RIGHT):
                frames[cam].append(KeypointFrame(k, world.t, cam, list(dets[cam])))
        result = pipeline.process(dets, world.t, dt)
        truth = None
        if scenario.target_id is not None:
            truth = true_target_depth(world, scenario.target_id)
        rec = record_from_result(result, truth)
        rec.target_similarity_left = _target_similarity(dets[Camera.LEFT], pipeline, scenario.target_id)
        rec.target_similarity_right = _target_similarity(dets[Camera.RIGHT], pipeline, scenario.target_id)
        trace.append(rec)
        path.append((world.robot.x, world.robot.y, world.robot.theta))
        world = replace(world, robot=replace(world.robot, v=result.command.v, w=result.command.w))
        world = step_world(world, dt)
    return RunResult(trace, frames if record_detections else {}, path)
