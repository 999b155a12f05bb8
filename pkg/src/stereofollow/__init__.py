"""Two-camera late-fusion person following.

Each camera detects and identifies the target on its own; only the two torso
centers are fused into a depth, which drives a PID follower.
"""
from .appearance import HsvPixel, HueHistogram, RgbPixel, Template, build_histogram, is_target, rgb_to_hsv, similarity
from .control import ControlCommand, ControlGains, ControllerConfig, ControllerState, PidGains
from .detection import Camera, Keypoint, PersonDetection, TorsoRegion, parse_keypoint_log, torso_region
from .geometry import DepthMeasurement, RigPoint3, StereoRig, bearing, depth_from_disparity, focal_px_from_fov, project
from .kernels import BACKEND_NAME
from .pipeline import FollowPipeline
from .tracker import FusedObservation, TrackerConfig, TrackMode, TrackState, fuse, identify

__version__ = "0.1.0"
