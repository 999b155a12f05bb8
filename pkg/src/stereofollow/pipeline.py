"""One frame of the follow loop: identify -> fuse -> track step -> control update.

The simulator and the log replayer both drive this class, so a replayed log
goes through exactly the same arithmetic as the live run that produced it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import control, tracker
from .appearance import Template
from .control import ControlCommand, ControlGains, ControllerConfig, ControllerState
from .detection import Camera, PersonDetection
from .errors import BadMatchError
from .geometry import StereoRig
from .tracker import Candidate, FusedObservation, TrackerConfig, TrackState


@dataclass(frozen=True)
class FrameResult:
    t: float
    chosen: dict[Camera, Candidate | None]
    fused: FusedObservation | None
    rejected: str | None  # why a two-view pair was discarded, if it was
    track: TrackState
    command: ControlCommand


class FollowPipeline:
    def __init__(
        self,
        rig: StereoRig,
        template: Template | None,
        tracker_cfg: TrackerConfig = TrackerConfig(),
        gains: ControlGains = ControlGains(),
        controller_cfg: ControllerConfig = ControllerConfig(),
        assume_single_person: bool = False,
    ):
        if template is None and not assume_single_person:
            raise ValueError("a template is required unless assume_single_person is set")
        self.rig = rig
        self.template = template
        self.tracker_cfg = tracker_cfg
        self.gains = gains
        self.controller_cfg = controller_cfg
        self.assume_single_person = assume_single_person
        self.track = TrackState()
        self.ctrl = ControllerState()

    def _identify(self, detections: Mapping[Camera, Sequence[PersonDetection]]):
        if self.assume_single_person:
            single = tracker.identify_single_person(detections)
            if all(c is not None for c in single.values()) or self.template is None:
                return single
        return tracker.identify(detections, self.template, self.tracker_cfg)

    def process(self, detections: Mapping[Camera, Sequence[PersonDetection]], t: float, dt: float) -> FrameResult:
        chosen = self._identify(detections)
        rejected = None
        try:
            fused = tracker.fuse(chosen[Camera.LEFT], chosen[Camera.RIGHT], self.rig, self.tracker_cfg, t)
        except BadMatchError as exc:
            fused, rejected = None, type(exc).__name__
        self.track = tracker.step(self.track, fused, dt, self.tracker_cfg)
        self.ctrl, cmd = control.update(self.ctrl, self.track, dt, self.gains, self.controller_cfg)
        return FrameResult(t, chosen, fused, rejected, self.track, cmd)
