import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stereofollow.detection import (
    BODY25_TO_COCO18,
    COCO18_NAMES,
    Camera,
    Keypoint,
    KeypointFrame,
    PersonDetection,
    detection_histogram,
    dump_keypoint_log,
    parse_keypoint_frames,
    parse_keypoint_log,
    torso_region,
)
from stereofollow.errors import LogParseError, NoAppearanceDataError, NoTorsoError, SchemaError

from .helpers import L_HIP, hue_pixels, make_detection

# OpenPose BODY_25 output order, from the OpenPose output documentation.
BODY25_NAMES = (
    "nose", "neck", "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow", "l_wrist",
    "mid_hip", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle",
    "r_eye", "l_eye", "r_ear", "l_ear",
    "l_big_toe", "l_small_toe", "l_heel", "r_big_toe", "r_small_toe", "r_heel",
)


class TestTorsoRegion:
    def test_rectangle_and_center(self):
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120))
        r = torso_region(d)
        assert (r.x_min, r.x_max, r.y_min, r.y_max) == (100, 140, 50, 120)
        assert (r.center_u, r.center_v) == (120, 85)

    def test_degenerate(self):
        d = make_detection((50, 50), (50, 50), (50, 50), (50, 50))
        r = torso_region(d)
        assert (r.x_min, r.x_max, r.y_min, r.y_max, r.center_u, r.center_v) == (50,) * 6
        assert r.area == 0

    def test_missing_hip(self):
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120))
        kps = list(d.keypoints)
        kps[L_HIP] = Keypoint.absent()
        d.keypoints = tuple(kps)
        with pytest.raises(NoTorsoError):
            torso_region(d)

    def test_low_confidence(self):
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120), conf=0.29)
        with pytest.raises(NoTorsoError):
            torso_region(d)

    @given(st.lists(st.tuples(st.integers(-1000, 1000), st.integers(-1000, 1000)), min_size=4, max_size=4),
           st.integers(-500, 500), st.integers(-500, 500))
    def test_translation_equivariance_exact_on_integers(self, pts, du, dv):
        a = torso_region(make_detection(*pts))
        b = torso_region(make_detection(*[(u + du, v + dv) for u, v in pts]))
        assert (b.x_min - a.x_min, b.x_max - a.x_max, b.center_u - a.center_u) == (du, du, du)
        assert (b.y_min - a.y_min, b.y_max - a.y_max, b.center_v - a.center_v) == (dv, dv, dv)

    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=4, max_size=4),
           st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_translation_equivariance_floats(self, pts, du, dv):
        a = torso_region(make_detection(*pts))
        b = torso_region(make_detection(*[(u + du, v + dv) for u, v in pts]))
        assert b.center_u - a.center_u == pytest.approx(du, abs=1e-9)
        assert b.center_v - a.center_v == pytest.approx(dv, abs=1e-9)

    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=4, max_size=4),
           st.permutations(range(4)))
    def test_center_permutation_invariant(self, pts, perm):
        a = torso_region(make_detection(*pts))
        b = torso_region(make_detection(*[pts[i] for i in perm]))
        assert (a.center_u, a.center_v) == (b.center_u, b.center_v)


class TestDetectionHistogram:
    def test_blue_clothing(self):
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120), pixels=hue_pixels(200.0, std=4.0))
        h = detection_histogram(d)
        assert h.argmax_bin() in (19, 20)
        assert h.bins[19] + h.bins[20] > 0.9

    def test_no_pixels(self):
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120))
        with pytest.raises(NoAppearanceDataError):
            detection_histogram(d)

    def test_all_gray(self):
        px = np.column_stack([np.full(10, np.nan), np.zeros(10), np.full(10, 0.5)])
        d = make_detection((100, 50), (140, 50), (105, 120), (135, 120), pixels=px)
        with pytest.raises(NoAppearanceDataError):
            detection_histogram(d)


def _canonical_line(n_kp=18, **extra):
    kp = [[float(10 * i), float(i), 0.9] for i in range(n_kp)]
    rec = {"frame": 3, "t": 0.3, "camera": "left", "people": [{"kp": kp, "torso_hsv": [[200.0, 0.8, 0.5]]}]}
    rec.update(extra)
    return json.dumps(rec)


class TestParse:
    def test_one_record(self):
        dets = parse_keypoint_log(_canonical_line())
        assert len(dets) == 1
        d = dets[0]
        assert d.camera is Camera.LEFT and d.frame_index == 3 and d.timestamp_s == 0.3
        assert d.keypoints[5] == Keypoint(50.0, 5.0, 0.9, True)
        assert d.torso_pixels.shape == (1, 3)

    def test_unknown_fields_ignored(self):
        assert len(parse_keypoint_log(_canonical_line(extra_field={"a": 1}))) == 1

    def test_seventeen_triplets(self):
        with pytest.raises(SchemaError):
            parse_keypoint_log(_canonical_line(n_kp=17))

    def test_malformed_json_reports_line(self):
        text = _canonical_line() + "\n{not json\n"
        with pytest.raises(LogParseError) as err:
            parse_keypoint_log(text)
        assert err.value.line == 2
        assert "line 2" in str(err.value)

    def test_frames_must_not_go_backwards(self):
        a = _canonical_line()
        b = _canonical_line(frame=1)
        with pytest.raises(LogParseError):
            parse_keypoint_log(a + "\n" + b)

    def test_zero_confidence_is_absent(self):
        rec = json.loads(_canonical_line())
        rec["people"][0]["kp"][0] = [0, 0, 0]
        d = parse_keypoint_log(json.dumps(rec))[0]
        assert not d.keypoints[0].present

    def test_multiple_people_and_empty_frames(self):
        rec = json.loads(_canonical_line())
        rec["people"].append(rec["people"][0])
        empty = {"frame": 4, "t": 0.4, "camera": "left", "people": []}
        frames = parse_keypoint_frames(json.dumps(rec) + "\n" + json.dumps(empty))
        assert [len(f.people) for f in frames] == [2, 0]

    def test_native_body25(self):
        flat = []
        for i in range(25):
            flat += [100.0 + i, 200.0 + i, 0.5]
        line = json.dumps({"version": 1.3, "people": [{"pose_keypoints_2d": flat}]})
        d = parse_keypoint_log(line, camera="right")[0]
        assert d.camera is Camera.RIGHT and d.frame_index == 0
        assert len(d.torso_pixels) == 0
        for coco_idx, name in enumerate(COCO18_NAMES):
            body_idx = BODY25_NAMES.index(name)
            assert d.keypoints[coco_idx].u == 100.0 + body_idx, name
        assert BODY25_TO_COCO18 == tuple(BODY25_NAMES.index(n) for n in COCO18_NAMES)

    def test_native_wrong_length(self):
        line = json.dumps({"people": [{"pose_keypoints_2d": [0.0] * 72}]})
        with pytest.raises(SchemaError):
            parse_keypoint_log(line, camera="left")

    def test_native_needs_camera(self):
        line = json.dumps({"people": [{"pose_keypoints_2d": [0.0] * 75}]})
        with pytest.raises(SchemaError):
            parse_keypoint_log(line)

    def test_native_frames_numbered_by_record(self):
        line = json.dumps({"people": [{"pose_keypoints_2d": [1.0] * 75}]})
        frames = parse_keypoint_frames("\n".join([line] * 3), camera="left", frame_period_s=0.05)
        assert [f.frame_index for f in frames] == [0, 1, 2]
        assert frames[2].timestamp_s == pytest.approx(0.1)


def test_canonical_round_trip(rng):
    frames = []
    for k in range(5):
        people = []
        for j in range(k % 3):
            kps = tuple(Keypoint(*rng.uniform(0, 600, 2), 0.9, True) if rng.random() > 0.2 else Keypoint.absent()
                        for _ in range(18))
            px = np.column_stack([rng.uniform(0, 360, 7), rng.uniform(0, 1, 7), rng.uniform(0, 1, 7)])
            px[0, 0] = math.nan
            people.append(PersonDetection(Camera.RIGHT, k, k * 0.1, kps, px, f"p{j}" if j else None))
        frames.append(KeypointFrame(k, k * 0.1, Camera.RIGHT, people))
    text = dump_keypoint_log(frames)
    again = parse_keypoint_frames(text)
    assert [f.frame_index for f in again] == list(range(5))
    for a, b in zip(frames, again):
        assert a.people == b.people and a.timestamp_s == b.timestamp_s
    assert dump_keypoint_log(again) == text
