"""Target identification, two-view fusion and the track state machine.

Each camera picks its own best match against the template; only when both
cameras agree on a candidate are the two torso centers combined into a depth.
A frame with fewer than two views counts as a miss.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .appearance import DEFAULT_MIN_SATURATION, DEFAULT_THRESHOLD, Template, is_target, similarity
from .detection import Camera, PersonDetection, TorsoRegion, detection_histogram, torso_region
from .errors import (
    EpipolarViolationError,
    NoAppearanceDataError,
    NoTorsoError,
    ParameterError,
)
from .geometry import DepthMeasurement, StereoRig, bearing, depth_from_disparity


class TrackMode(str, enum.Enum):
    SEARCHING = "SEARCHING"
    TRACKING = "TRACKING"
    OCCLUDED = "OCCLUDED"
    LOST = "LOST"


@dataclass(frozen=True)
class TrackerConfig:
    threshold: float = DEFAULT_THRESHOLD
    epipolar_tol: float = 20.0
    t_lost: float = 2.0
    min_saturation: float = DEFAULT_MIN_SATURATION

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not self.epipolar_tol >= 0:
            raise ParameterError(f"epipolar_tol must be >= 0, got {self.epipolar_tol}")
        if not self.t_lost > 0:
            raise ParameterError(f"t_lost must be > 0, got {self.t_lost}")
        if not 0.0 <= self.min_saturation <= 1.0:
            raise ParameterError(f"min_saturation must lie in [0, 1], got {self.min_saturation}")


@dataclass(frozen=True)
class Candidate:
    """A detection that passed the similarity gate in one camera."""

    detection: PersonDetection
    region: TorsoRegion
    similarity: float
    order: int


@dataclass(frozen=True)
class FusedObservation:
    u_left_center: float
    u_right_center: float
    v_left_center: float
    v_right_center: float
    similarity_left: float
    similarity_right: float
    measurement: DepthMeasurement


@dataclass(frozen=True)
class TrackState:
    mode: TrackMode = TrackMode.SEARCHING
    last_measurement: DepthMeasurement | None = None
    time_since_seen_s: float = 0.0


def score_detections(
    detections: Sequence[PersonDetection], template: Template, min_saturation: float
) -> list[tuple[PersonDetection, TorsoRegion, float] | None]:
    """Similarity of each detection to the template, or None when it has no usable torso."""
    out: list[tuple[PersonDetection, TorsoRegion, float] | None] = []
    for d in detections:
        try:
            region = torso_region(d)
            hist = detection_histogram(d, min_saturation)
        except (NoTorsoError, NoAppearanceDataError):
            out.append(None)
            continue
        out.append((d, region, similarity(hist, template.histogram)))
    return out


def _choose(scored, threshold: float, skip_gate: bool = False) -> Candidate | None:
    best: Candidate | None = None
    for order, item in enumerate(scored):
        if item is None:
            continue
        d, region, score = item
        if not skip_gate and not is_target(score, threshold):
            continue
        cand = Candidate(d, region, score, order)
        if best is None:
            best = cand
        elif (cand.similarity, cand.region.area) > (best.similarity, best.region.area):
            # equal keys keep the earlier candidate
            best = cand
    return best


def identify(
    detections: Mapping[Camera, Sequence[PersonDetection]],
    template: Template,
    cfg: TrackerConfig,
) -> dict[Camera, Candidate | None]:
    """Per camera, the qualifying detection with the highest similarity.

    Ties go to the larger torso area, then to the detection listed first.
    """
    return {
        cam: _choose(score_detections(detections.get(cam, ()), template, cfg.min_saturation), cfg.threshold)
        for cam in (Camera.LEFT, Camera.RIGHT)
    }


def identify_single_person(
    detections: Mapping[Camera, Sequence[PersonDetection]],
) -> dict[Camera, Candidate | None]:
    """Geometry-only fallback: take the sole person in each camera without any appearance gate."""
    out: dict[Camera, Candidate | None] = {}
    for cam in (Camera.LEFT, Camera.RIGHT):
        dets = list(detections.get(cam, ()))
        out[cam] = None
        if len(dets) == 1:
            try:
                out[cam] = Candidate(dets[0], torso_region(dets[0]), float("nan"), 0)
            except NoTorsoError:
                pass
    return out


def fuse(
    left: Candidate | None,
    right: Candidate | None,
    rig: StereoRig,
    cfg: TrackerConfig,
    t: float,
) -> FusedObservation | None:
    """Depth and bearing from the two torso centers; None if either view is missing.

    Raises NonPositiveDisparityError (a BadMatchError) or EpipolarViolationError
    when the pair cannot be the same person.
    """
    if left is None or right is None:
        return None
    ul, vl = left.region.center_u, left.region.center_v
    ur, vr = right.region.center_u, right.region.center_v
    if abs(vl - vr) > cfg.epipolar_tol:
        raise EpipolarViolationError(
            f"|v_left - v_right| = {abs(vl - vr):.3f} px exceeds tolerance {cfg.epipolar_tol}"
        )
    z = depth_from_disparity(rig, ul, ur)
    m = DepthMeasurement(
        z_m=z, bearing_rad=bearing(rig, (ul + ur) / 2.0), u_left=ul, u_right=ur, timestamp_s=t
    )
    return FusedObservation(ul, ur, vl, vr, left.similarity, right.similarity, m)


def step(state: TrackState, fused: FusedObservation | None, dt: float, cfg: TrackerConfig) -> TrackState:
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    if fused is not None:
        return TrackState(TrackMode.TRACKING, fused.measurement, 0.0)
    elapsed = state.time_since_seen_s + dt
    if state.mode is TrackMode.SEARCHING:
        return replace(state, time_since_seen_s=elapsed)
    mode = TrackMode.LOST if elapsed > cfg.t_lost else TrackMode.OCCLUDED
    return TrackState(mode, state.last_measurement, elapsed)
