"""Keypoint-based person detections, the torso region, and keypoint log I/O.

Keypoints follow the 18-point COCO layout used by OpenPose's COCO model:

    0 nose, 1 neck, 2 r_shoulder, 3 r_elbow, 4 r_wrist, 5 l_shoulder,
    6 l_elbow, 7 l_wrist, 8 r_hip, 9 r_knee, 10 r_ankle, 11 l_hip,
    12 l_knee, 13 l_ankle, 14 r_eye, 15 l_eye, 16 r_ear, 17 l_ear

Canonical log format, one JSON object per line::

    {"frame": 12, "t": 1.2, "camera": "left",
     "people": [{"kp": [[u, v, c], ...18], "torso_hsv": [[h, s, v], ...], "id": "target"}]}

``id`` is optional ground truth written by the simulator. A keypoint with
``c == 0`` is absent. ``h`` may be ``null`` for achromatic pixels.

OpenPose-native records (``"pose_keypoints_2d"`` flat arrays of 75 BODY-25
numbers, or 54 COCO numbers) are accepted too; BODY-25 is mapped through
:data:`BODY25_TO_COCO18` and the extra foot/mid-hip points are dropped.
"""
from __future__ import annotations

import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .appearance import DEFAULT_MIN_SATURATION, HueHistogram, as_hsv_array, build_histogram
from .errors import LogParseError, NoAppearanceDataError, NoTorsoError, SchemaError

COCO18_NAMES = (
    "nose", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
    "r_eye", "l_eye", "r_ear", "l_ear",
)
N_KEYPOINTS = 18
R_SHOULDER, L_SHOULDER, R_HIP, L_HIP = 2, 5, 8, 11
TORSO_KEYPOINTS = (R_SHOULDER, L_SHOULDER, R_HIP, L_HIP)
MIN_TORSO_CONFIDENCE = 0.3

# COCO-18 index -> BODY-25 index (BODY-25 inserts mid_hip at 8 and appends six foot points)
BODY25_TO_COCO18 = (0, 1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18)


class Camera(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Keypoint(NamedTuple):
    u: float
    v: float
    confidence: float
    present: bool

    @classmethod
    def absent(cls) -> Keypoint:
        return cls(0.0, 0.0, 0.0, False)


def _empty_pixels() -> np.ndarray:
    return np.zeros((0, 3))


@dataclass(eq=False)
class PersonDetection:
    camera: Camera
    frame_index: int
    timestamp_s: float
    keypoints: tuple[Keypoint, ...]
    torso_pixels: np.ndarray = field(default_factory=_empty_pixels)
    person_id: str | None = None

    def __post_init__(self) -> None:
        self.camera = Camera(self.camera)
        self.keypoints = tuple(Keypoint(*k) for k in self.keypoints)
        if len(self.keypoints) != N_KEYPOINTS:
            raise SchemaError(f"expected {N_KEYPOINTS} keypoints, got {len(self.keypoints)}")
        if self.frame_index < 0:
            raise SchemaError(f"frame_index must be >= 0, got {self.frame_index}")
        self.torso_pixels = as_hsv_array(self.torso_pixels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PersonDetection):
            return NotImplemented
        return (
            self.camera == other.camera
            and self.frame_index == other.frame_index
            and self.timestamp_s == other.timestamp_s
            and self.keypoints == other.keypoints
            and self.person_id == other.person_id
            and np.array_equal(self.torso_pixels, other.torso_pixels, equal_nan=True)
        )


@dataclass(frozen=True)
class TorsoRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    center_u: float
    center_v: float

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


def torso_region(d: PersonDetection, min_confidence: float = MIN_TORSO_CONFIDENCE) -> TorsoRegion:
    """Shoulder-to-hip rectangle and the centroid of the four defining keypoints."""
    pts = [d.keypoints[i] for i in TORSO_KEYPOINTS]
    for idx, kp in zip(TORSO_KEYPOINTS, pts):
        if not kp.present or kp.confidence < min_confidence:
            raise NoTorsoError(f"{COCO18_NAMES[idx]} missing or below confidence {min_confidence}")
    us = [kp.u for kp in pts]
    vs = [kp.v for kp in pts]
    # fsum is correctly rounded, so the centroid does not depend on keypoint order
    return TorsoRegion(
        x_min=min(us), x_max=max(us), y_min=min(vs), y_max=max(vs),
        center_u=math.fsum(us) / 4.0, center_v=math.fsum(vs) / 4.0,
    )


def detection_histogram(d: PersonDetection, min_saturation: float = DEFAULT_MIN_SATURATION) -> HueHistogram:
    torso_region(d)
    if len(d.torso_pixels) == 0:
        raise NoAppearanceDataError("detection carries no torso pixels")
    hist = build_histogram(d.torso_pixels, min_saturation)
    if hist.is_empty:
        raise NoAppearanceDataError("no torso pixel passed the saturation filter")
    return hist


@dataclass
class KeypointFrame:
    """All detections of one camera at one frame index (possibly none)."""

    frame_index: int
    timestamp_s: float
    camera: Camera
    people: list[PersonDetection] = field(default_factory=list)


def _parse_triplets(flat_or_nested, line: int, native: bool) -> tuple[Keypoint, ...]:
    if native:
        flat = list(flat_or_nested)
        if len(flat) == 75:
            trip = [flat[3 * i: 3 * i + 3] for i in range(25)]
            trip = [trip[j] for j in BODY25_TO_COCO18]
        elif len(flat) == 54:
            trip = [flat[3 * i: 3 * i + 3] for i in range(18)]
        else:
            raise SchemaError(
                f"pose_keypoints_2d has {len(flat)} numbers; expected 75 (BODY-25) or 54 (COCO)", line
            )
    else:
        trip = list(flat_or_nested)
        if len(trip) != N_KEYPOINTS:
            raise SchemaError(f"expected {N_KEYPOINTS} keypoint triplets, got {len(trip)}", line)
    kps = []
    for t in trip:
        if len(t) != 3:
            raise SchemaError(f"keypoint triplet has {len(t)} values", line)
        u, v, c = (float(x) for x in t)
        kps.append(Keypoint(u, v, c, c > 0.0))
    return tuple(kps)


def _parse_pixels(rows, line: int) -> np.ndarray:
    try:
        arr = np.array(
            [[math.nan if x is None else float(x) for x in row] for row in rows], dtype=np.float64
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad torso_hsv entry: {exc}", line) from None
    if arr.size == 0:
        return _empty_pixels()
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise SchemaError("torso_hsv rows must be [h, s, v] triplets", line)
    return arr


def _lines(stream) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def parse_keypoint_frames(
    stream, camera: Camera | str | None = None, frame_period_s: float = 0.1
) -> list[KeypointFrame]:
    """Parse a keypoint log into per-frame records.

    ``camera`` and ``frame_period_s`` fill in fields that native records lack;
    a record's own ``camera``/``frame``/``t`` always take precedence.
    """
    frames: list[KeypointFrame] = []
    last_frame: dict[Camera, int] = {}
    record_no = 0
    for lineno, raw in enumerate(_lines(stream), start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise SchemaError("record is not a JSON object", lineno)
        people_raw = rec.get("people", [])
        if not isinstance(people_raw, list):
            raise SchemaError("'people' must be a list", lineno)
        cam_raw = rec.get("camera", camera)
        if cam_raw is None:
            raise SchemaError("record has no camera and none was supplied", lineno)
        try:
            cam = Camera(cam_raw)
        except ValueError:
            raise SchemaError(f"unknown camera {cam_raw!r}", lineno) from None
        try:
            frame_index = int(rec.get("frame", record_no))
            t = float(rec["t"]) if "t" in rec else frame_index * frame_period_s
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad frame/t field: {exc}", lineno) from None
        if frame_index < last_frame.get(cam, -1):
            raise LogParseError(
                f"frame {frame_index} after frame {last_frame[cam]} for the {cam.value} camera", lineno
            )
        last_frame[cam] = frame_index
        people = []
        for person in people_raw:
            if not isinstance(person, dict):
                raise SchemaError("person entry is not an object", lineno)
            if "kp" in person:
                kps = _parse_triplets(person["kp"], lineno, native=False)
            elif "pose_keypoints_2d" in person:
                kps = _parse_triplets(person["pose_keypoints_2d"], lineno, native=True)
            else:
                raise SchemaError("person has neither 'kp' nor 'pose_keypoints_2d'", lineno)
            pixels = _parse_pixels(person.get("torso_hsv", []), lineno)
            pid = person.get("id")
            people.append(PersonDetection(
                cam, frame_index, t, kps, pixels, None if pid is None else str(pid)
            ))
        frames.append(KeypointFrame(frame_index, t, cam, people))
        record_no += 1
    return frames


def parse_keypoint_log(stream, camera: Camera | str | None = None, frame_period_s: float = 0.1) -> list[PersonDetection]:
    """Flatten a keypoint log into detections, in frame order."""
    return [d for f in parse_keypoint_frames(stream, camera, frame_period_s) for d in f.people]


def _num(x: float):
    return None if math.isnan(x) else float(x)


def format_keypoint_frame(frame: KeypointFrame) -> str:
    people = []
    for d in frame.people:
        entry: dict = {
            "kp": [[float(k.u), float(k.v), float(k.confidence)] for k in d.keypoints],
            "torso_hsv": [[_num(h), float(s), float(v)] for h, s, v in d.torso_pixels.tolist()],
        }
        if d.person_id is not None:
            entry["id"] = d.person_id
        people.append(entry)
    rec = {
        "frame": int(frame.frame_index),
        "t": float(frame.timestamp_s),
        "camera": Camera(frame.camera).value,
        "people": people,
    }
    return json.dumps(rec, separators=(",", ":"))


def dump_keypoint_log(frames: Iterable[KeypointFrame]) -> str:
    return "".join(format_keypoint_frame(f) + "\n" for f in frames)
