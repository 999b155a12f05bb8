"""Simulated world: walking people, lighting, a unicycle robot and a synthetic pose detector.

World frame is planar (x, y) in meters with heading theta measured
counter-clockwise from +x. The stereo rig sits on the robot at
``mount_height_m`` looking along the heading.

People are drawn as their back view, squarely facing the rig: every torso
keypoint of one person therefore shares the same rig depth. Each person also
carries an infinitely tall vertical occlusion cylinder; a keypoint vanishes
from a camera when the sight line to it passes strictly inside another
person's cylinder or when it falls outside the image.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import kernels
from ..detection import N_KEYPOINTS, Camera, Keypoint, PersonDetection
from ..errors import ParameterError
from ..geometry import StereoRig

N_TORSO_SAMPLES = 500
DETECTION_CONFIDENCE = 0.9

# (lateral offset to the person's right in meters, height above floor in meters), COCO-18 order.
# Only shoulders and hips feed the tracker; the rest keep the skeleton plausible.
_SKELETON = (
    (0.0, 1.60),    # nose
    (0.0, 1.45),    # neck
    (None, 1.40),   # r_shoulder: +shoulder_halfwidth
    (0.25, 1.15),   # r_elbow
    (0.27, 0.90),   # r_wrist
    (None, 1.40),   # l_shoulder: -shoulder_halfwidth
    (-0.25, 1.15),  # l_elbow
    (-0.27, 0.90),  # l_wrist
    (None, 0.90),   # r_hip: +hip_halfwidth
    (0.15, 0.50),   # r_knee
    (0.15, 0.10),   # r_ankle
    (None, 0.90),   # l_hip: -hip_halfwidth
    (-0.15, 0.50),  # l_knee
    (-0.15, 0.10),  # l_ankle
    (0.03, 1.65),   # r_eye
    (-0.03, 1.65),  # l_eye
    (0.07, 1.62),   # r_ear
    (-0.07, 1.62),  # l_ear
)


@dataclass(frozen=True)
class BodyGeometry:
    shoulder_height: float = 1.4
    hip_height: float = 0.9
    shoulder_halfwidth: float = 0.2
    hip_halfwidth: float = 0.15
    radius: float = 0.25

    def keypoint_offsets(self) -> np.ndarray:
        """(18, 2) array of (lateral, height) offsets."""
        rows = list(_SKELETON)
        rows[2] = (self.shoulder_halfwidth, self.shoulder_height)
        rows[5] = (-self.shoulder_halfwidth, self.shoulder_height)
        rows[8] = (self.hip_halfwidth, self.hip_height)
        rows[11] = (-self.hip_halfwidth, self.hip_height)
        return np.array(rows, dtype=np.float64)

    @property
    def torso_center_height(self) -> float:
        return (self.shoulder_height + self.hip_height) / 2.0


@dataclass(frozen=True)
class PersonModel:
    id: str
    waypoints: tuple[tuple[float, float, float], ...]  # (t, x, y)
    clothing_hue_deg: float = 0.0
    clothing_hue_std_deg: float = 8.0
    clothing_saturation: float = 0.8
    clothing_value: float = 0.8
    body: BodyGeometry = BodyGeometry()

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ParameterError(f"person {self.id}: needs at least one waypoint")
        ts = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ParameterError(f"person {self.id}: waypoint times must be strictly increasing")
        if not self.body.radius > 0:
            raise ParameterError(f"person {self.id}: radius must be > 0")

    def position(self, t: float) -> tuple[float, float]:
        """Linear interpolation between waypoints; holds still before the first and after the last."""
        ts = [w[0] for w in self.waypoints]
        xs = [w[1] for w in self.waypoints]
        ys = [w[2] for w in self.waypoints]
        return float(np.interp(t, ts, xs)), float(np.interp(t, ts, ys))


@dataclass(frozen=True)
class LightingSchedule:
    """Piecewise-linear value scale over time, optionally repeating with ``period_s``."""

    keyframes: tuple[tuple[float, float], ...] = ((0.0, 1.0),)
    period_s: float | None = None
    hue_jitter_std_deg: float = 0.0

    def __post_init__(self) -> None:
        if not self.keyframes:
            raise ParameterError("lighting needs at least one keyframe")
        ts = [k[0] for k in self.keyframes]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ParameterError("lighting keyframe times must be strictly increasing")
        if any(not 0.0 < k[1] <= 1.0 for k in self.keyframes):
            raise ParameterError("lighting scale must lie in (0, 1]")
        if self.period_s is not None and not self.period_s > 0:
            raise ParameterError("lighting period_s must be > 0")

    def scale(self, t: float) -> float:
        if self.period_s is not None:
            t = math.fmod(t, self.period_s)
        return float(np.interp(t, [k[0] for k in self.keyframes], [k[1] for k in self.keyframes]))


@dataclass(frozen=True)
class NoiseModel:
    keypoint_noise_std_px: float = 0.0
    quantize_pixels: bool = False
    detection_dropout_prob: float = 0.0
    # (lighting scale, dropout probability) points; dropout follows the larger of this curve and the floor
    dropout_curve: tuple[tuple[float, float], ...] = ()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.keypoint_noise_std_px < 0:
            raise ParameterError("keypoint_noise_std_px must be >= 0")
        if not 0.0 <= self.detection_dropout_prob < 1.0:
            raise ParameterError("detection_dropout_prob must lie in [0, 1)")
        for s, p in self.dropout_curve:
            if not 0.0 <= p <= 1.0:
                raise ParameterError("dropout_curve probabilities must lie in [0, 1]")
        scales = [c[0] for c in self.dropout_curve]
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ParameterError("dropout_curve scales must be strictly increasing")

    def dropout_prob(self, lighting_scale: float) -> float:
        p = self.detection_dropout_prob
        if self.dropout_curve:
            curve = float(np.interp(lighting_scale, [c[0] for c in self.dropout_curve],
                                    [c[1] for c in self.dropout_curve]))
            p = max(p, curve)
        return p


@dataclass(frozen=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = 0.0
    w: float = 0.0

    @property
    def forward(self) -> tuple[float, float]:
        return math.cos(self.theta), math.sin(self.theta)

    @property
    def right(self) -> tuple[float, float]:
        return math.sin(self.theta), -math.cos(self.theta)


@dataclass
class World:
    t: float
    robot: RobotState
    persons: tuple[PersonModel, ...] = ()
    lighting: LightingSchedule = LightingSchedule()
    mount_height_m: float = 1.15
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))


def step_world(world: World, dt: float) -> World:
    """Advance time by ``dt``; the robot integrates its current (v, w) with explicit Euler."""
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    r = world.robot
    robot = replace(
        r,
        x=r.x + r.v * math.cos(r.theta) * dt,
        y=r.y + r.v * math.sin(r.theta) * dt,
        theta=r.theta + r.w * dt,
    )
    return replace(world, t=world.t + dt, robot=robot)


def to_rig_frame(robot: RobotState, px: float, py: float) -> tuple[float, float]:
    """(lateral x to the right, forward depth z) of a world point relative to the rig center."""
    fx, fy = robot.forward
    rx, ry = robot.right
    dx, dy = px - robot.x, py - robot.y
    return dx * rx + dy * ry, dx * fx + dy * fy


def camera_positions(robot: RobotState, rig: StereoRig) -> dict[Camera, tuple[float, float]]:
    rx, ry = robot.right
    h = rig.baseline_m / 2.0
    return {
        Camera.LEFT: (robot.x - h * rx, robot.y - h * ry),
        Camera.RIGHT: (robot.x + h * rx, robot.y + h * ry),
    }


@dataclass(frozen=True)
class PersonView:
    """Noiseless geometry of one person as seen from the rig at one instant."""

    person: PersonModel
    center_xy: tuple[float, float]
    depth_m: float  # forward distance from the rig center to the torso plane
    lateral_m: float
    keypoints_xy: np.ndarray  # (18, 2) world positions
    keypoints_rig: np.ndarray  # (18, 3) rig-frame (x, y, z)


def person_views(world: World) -> list[PersonView]:
    robot = world.robot
    rx, ry = robot.right
    views = []
    for p in world.persons:
        cx, cy = p.position(world.t)
        lat, depth = to_rig_frame(robot, cx, cy)
        off = p.body.keypoint_offsets()
        kxy = np.column_stack([cx + off[:, 0] * rx, cy + off[:, 0] * ry])
        krig = np.column_stack([
            lat + off[:, 0],
            world.mount_height_m - off[:, 1],
            np.full(N_KEYPOINTS, depth),
        ])
        views.append(PersonView(p, (cx, cy), depth, lat, kxy, krig))
    return views


def true_target_depth(world: World, person_id: str) -> float:
    """Rig-frame depth of the person's torso centroid, i.e. what two-view fusion measures."""
    for p in world.persons:
        if p.id == person_id:
            return to_rig_frame(world.robot, *p.position(world.t))[1]
    raise KeyError(person_id)


def _project_camera(rig: StereoRig, cam: Camera, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # same formula as geometry.project, vectorized over keypoints
    half_b = rig.baseline_m / 2.0
    shift = half_b if cam is Camera.LEFT else -half_b
    z = pts[:, 2]
    u = rig.cx + rig.focal_px * (pts[:, 0] + shift) / z
    v = rig.cy + rig.focal_px * pts[:, 1] / z
    return u, v


def keypoint_visibility(world: World, rig: StereoRig) -> dict[str, dict[Camera, np.ndarray]]:
    """Noiseless per-keypoint visibility: inside the image and not blocked by another person."""
    views = person_views(world)
    cams = camera_positions(world.robot, rig)
    out: dict[str, dict[Camera, np.ndarray]] = {}
    for i, view in enumerate(views):
        others = [(o.center_xy, o.person.body.radius) for j, o in enumerate(views) if j != i]
        out[view.person.id] = {}
        for cam, (ax, ay) in cams.items():
            out[view.person.id][cam] = _visible(rig, cam, view, ax, ay, others)
    return out


def _visible(rig, cam, view: PersonView, ax, ay, others) -> np.ndarray:
    if view.depth_m <= 0:
        return np.zeros(N_KEYPOINTS, dtype=bool)
    u, v = _project_camera(rig, cam, view.keypoints_rig)
    w, h = rig.resolution
    vis = (u >= 0) & (u <= w - 1) & (v >= 0) & (v <= h - 1)
    for radius in sorted({r for _, r in others}):
        centers = np.array([c for c, r in others if r == radius], dtype=np.float64)
        vis &= ~kernels.segments_blocked(ax, ay, view.keypoints_xy, centers, radius)
    return vis


def render_detections(
    world: World, rig: StereoRig, noise: NoiseModel, frame_index: int = 0
) -> dict[Camera, list[PersonDetection]]:
    """Synthetic pose-detector output for both cameras at the world's current time.

    Random draws happen in a fixed order (person, then left/right camera), so
    output depends only on the world state and the generator state.
    """
    views = person_views(world)
    cams = camera_positions(world.robot, rig)
    scale = world.lighting.scale(world.t)
    jitter = world.lighting.hue_jitter_std_deg
    p_drop = noise.dropout_prob(scale)
    w, h = rig.resolution
    rng = world.rng
    out: dict[Camera, list[PersonDetection]] = {Camera.LEFT: [], Camera.RIGHT: []}
    for i, view in enumerate(views):
        others = [(o.center_xy, o.person.body.radius) for j, o in enumerate(views) if j != i]
        person = view.person
        for cam in (Camera.LEFT, Camera.RIGHT):
            kp_noise = rng.normal(0.0, 1.0, size=(N_KEYPOINTS, 2)) * noise.keypoint_noise_std_px
            drop_draw = rng.random()
            hue = (person.clothing_hue_deg
                   + person.clothing_hue_std_deg * rng.normal(0.0, 1.0, N_TORSO_SAMPLES)
                   + jitter * rng.normal(0.0, 1.0, N_TORSO_SAMPLES)) % 360.0
            if view.depth_m <= 0 or drop_draw < p_drop:
                continue
            ax, ay = cams[cam]
            blocked_free = _visible(rig, cam, view, ax, ay, others)
            u, v = _project_camera(rig, cam, view.keypoints_rig)
            u = u + kp_noise[:, 0]
            v = v + kp_noise[:, 1]
            if noise.quantize_pixels:
                u = np.floor(u + 0.5)
                v = np.floor(v + 0.5)
            present = blocked_free & (u >= 0) & (u <= w - 1) & (v >= 0) & (v <= h - 1)
            if not present.any():
                continue
            kps = tuple(
                Keypoint(float(u[k]), float(v[k]), DETECTION_CONFIDENCE, True) if present[k]
                else Keypoint.absent()
                for k in range(N_KEYPOINTS)
            )
            pixels = np.column_stack([
                hue,
                np.full(N_TORSO_SAMPLES, person.clothing_saturation),
                np.full(N_TORSO_SAMPLES, min(1.0, person.clothing_value * scale)),
            ])
            out[cam].append(PersonDetection(cam, frame_index, world.t, kps, pixels, person.id))
    return out
