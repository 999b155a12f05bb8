"""Parallel-rig pinhole geometry: projection, disparity depth and bearing.

The rig frame has its origin midway between the two optical centers, x to the
right, y down and z forward. The left camera sits at x = -b/2 and the right one
at x = +b/2; both share the same focal length and principal point.

Coordinates are continuous (sub-pixel). Rounding to whole pixels is a sensor
effect and lives in the simulator's noise stage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import BehindCameraError, NonPositiveDisparityError, ParameterError

# Rig used in the reference experiments: two 640x480 webcams, 54 deg FOV, 94 mm apart.
REFERENCE_BASELINE_M = 0.094
REFERENCE_RESOLUTION = (640, 480)
REFERENCE_HFOV_DEG = 54.0


def focal_px_from_fov(width: float, hfov_deg: float) -> float:
    """Focal length in pixels for an image ``width`` px wide with horizontal FOV ``hfov_deg``."""
    if not width > 0:
        raise ParameterError(f"width must be positive, got {width}")
    if not 0.0 < hfov_deg < 180.0:
        raise ParameterError(f"hfov_deg must lie in (0, 180), got {hfov_deg}")
    return (width / 2.0) / math.tan(hfov_deg * math.pi / 360.0)


@dataclass(frozen=True)
class StereoRig:
    baseline_m: float
    focal_px: float
    principal_point: tuple[float, float]
    resolution: tuple[int, int]
    hfov_deg: float | None = None

    def __post_init__(self) -> None:
        if not self.baseline_m > 0:
            raise ParameterError(f"baseline_m must be positive, got {self.baseline_m}")
        if not self.focal_px > 0:
            raise ParameterError(f"focal_px must be positive, got {self.focal_px}")
        w, h = self.resolution
        if w <= 0 or h <= 0:
            raise ParameterError(f"resolution must be positive, got {self.resolution}")
        if self.hfov_deg is not None and not 0.0 < self.hfov_deg < 180.0:
            raise ParameterError(f"hfov_deg must lie in (0, 180), got {self.hfov_deg}")

    @classmethod
    def from_fov(
        cls,
        baseline_m: float,
        resolution: tuple[int, int],
        hfov_deg: float,
        principal_point: tuple[float, float] | None = None,
    ) -> StereoRig:
        w, h = resolution
        if principal_point is None:
            principal_point = ((w - 1) / 2.0, (h - 1) / 2.0)
        return cls(
            baseline_m=float(baseline_m),
            focal_px=focal_px_from_fov(w, hfov_deg),
            principal_point=(float(principal_point[0]), float(principal_point[1])),
            resolution=(int(w), int(h)),
            hfov_deg=float(hfov_deg),
        )

    @classmethod
    def reference(cls) -> StereoRig:
        return cls.from_fov(REFERENCE_BASELINE_M, REFERENCE_RESOLUTION, REFERENCE_HFOV_DEG)

    @property
    def cx(self) -> float:
        return self.principal_point[0]

    @property
    def cy(self) -> float:
        return self.principal_point[1]

    def in_image(self, u: float, v: float) -> bool:
        w, h = self.resolution
        return 0.0 <= u <= w - 1 and 0.0 <= v <= h - 1


class RigPoint3(NamedTuple):
    x: float
    y: float
    z: float


class StereoProjection(NamedTuple):
    u_left: float
    v_left: float
    u_right: float
    v_right: float


@dataclass(frozen=True)
class DepthMeasurement:
    z_m: float
    bearing_rad: float
    u_left: float
    u_right: float
    timestamp_s: float

    @property
    def disparity_px(self) -> float:
        return self.u_left - self.u_right


def project(rig: StereoRig, p: RigPoint3 | tuple[float, float, float]) -> StereoProjection:
    x, y, z = p
    if not z > 0:
        raise BehindCameraError(f"point has z={z}; must be in front of the rig")
    half_b = rig.baseline_m / 2.0
    v = rig.cy + rig.focal_px * y / z
    return StereoProjection(
        u_left=rig.cx + rig.focal_px * (x + half_b) / z,
        v_left=v,
        u_right=rig.cx + rig.focal_px * (x - half_b) / z,
        v_right=v,
    )


def depth_from_disparity(rig: StereoRig, u_left: float, u_right: float) -> float:
    disparity = u_left - u_right
    if not disparity > 0:
        raise NonPositiveDisparityError(
            f"disparity u_left - u_right = {disparity} px; need > 0 for finite depth"
        )
    return rig.baseline_m * rig.focal_px / disparity


def bearing(rig: StereoRig, u_center: float) -> float:
    """Horizontal angle to an image column; 0 straight ahead, positive to the right."""
    return math.atan((u_center - rig.cx) / rig.focal_px)


def depth_error_per_pixel(rig: StereoRig, z: float) -> float:
    """First-order depth change caused by a one-pixel disparity error at depth ``z``."""
    return z * z / (rig.baseline_m * rig.focal_px)
