import json

import numpy as np
import pytest

from stereofollow.appearance import Template, similarity
from stereofollow.cli import align_frames, main
from stereofollow.detection import Camera, KeypointFrame, parse_keypoint_frames
from stereofollow.errors import AlignmentError
from stereofollow.geometry import StereoRig, project
from stereofollow.trace import SCHEMA_VERSION, Trace


def read_csv_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == f"# schema_version: {SCHEMA_VERSION}"
    assert lines[1] == "t_s,estimated_z_m"
    return [tuple(line.split(",")) for line in lines[2:]]


@pytest.fixture(scope="module")
def crossing_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("crossing")
    assert main(["run", "crossing", "--out", str(out), "--export-logs", "--set", "duration_s=16.0"]) == 0
    return out


def test_run_writes_all_outputs(crossing_run):
    for name in ("trace.jsonl", "trace.csv", "metrics.json", "left.jsonl", "right.jsonl", "template.json"):
        assert (crossing_run / name).exists()
    metrics = json.loads((crossing_run / "metrics.json").read_text())
    assert metrics["schema_version"] == SCHEMA_VERSION
    assert json.loads((crossing_run / "template.json").read_text())["schema_version"] == SCHEMA_VERSION
    for line in (crossing_run / "trace.jsonl").read_text().splitlines():
        assert json.loads(line)["schema_version"] == SCHEMA_VERSION
    assert len(read_csv_rows(crossing_run / "trace.csv")) == 160


def test_replay_reproduces_run(crossing_run, tmp_path):
    rc = main(["replay", str(crossing_run / "left.jsonl"), str(crossing_run / "right.jsonl"),
               "--template", str(crossing_run / "template.json"), "--scenario", "crossing",
               "--out", str(tmp_path)])
    assert rc == 0
    assert read_csv_rows(tmp_path / "trace.csv") == read_csv_rows(crossing_run / "trace.csv")


def test_seed_flag_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["run", "bright_lighting", "--seed", "7", "--set", "duration_s=5.0"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for name in ("trace.jsonl", "trace.csv", "metrics.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_missing_scenario_exits_2(tmp_path, caplog):
    assert main(["run", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 2
    assert "not found" in caplog.text


def test_validate(tmp_path, caplog):
    assert main(["validate", "crossing"]) == 0
    assert main(["validate", "crossing", "--set", "dt=0", "--set", "tracker.threshold=2"]) == 2
    assert "dt" in caplog.text and "tracker.threshold" in caplog.text


def test_validate_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("duration_s = [\n")
    assert main(["validate", str(p)]) == 2


def test_make_template_blue(tmp_path):
    rng = np.random.default_rng(0)
    hsv = np.column_stack([rng.normal(245, 1.5, 500), np.full(500, 0.8), np.full(500, 0.6)])
    src = tmp_path / "pixels.json"
    src.write_text(json.dumps({"hsv": hsv.tolist()}))
    out = tmp_path / "t.json"
    assert main(["make-template", str(src), "--label", "blue", "--out", str(out)]) == 0
    t = Template.load(out)
    assert t.label == "blue"
    assert t.histogram.argmax_bin() == 24


def test_make_template_rgb_input(tmp_path):
    src = tmp_path / "pixels.json"
    src.write_text(json.dumps({"rgb": [[0.0, 0.0, 1.0]] * 10}))
    out = tmp_path / "t.json"
    assert main(["make-template", str(src), "--out", str(out)]) == 0
    assert Template.load(out).histogram.argmax_bin() == 24


def test_make_template_all_gray(tmp_path, caplog):
    src = tmp_path / "gray.json"
    src.write_text(json.dumps({"hsv": [[None, 0.0, 0.5]] * 100}))
    assert main(["make-template", str(src), "--out", str(tmp_path / "t.json")]) == 2
    assert not (tmp_path / "t.json").exists()


def test_template_from_log_matches_target(crossing_run, tmp_path):
    out = tmp_path / "t.json"
    assert main(["make-template", str(crossing_run / "left.jsonl"), "--frame", "0", "--out", str(out)]) == 0
    frames = parse_keypoint_frames((crossing_run / "left.jsonl").read_text())
    target = [d for d in frames[0].people if d.person_id == "target"][0]
    from stereofollow.detection import detection_histogram
    assert similarity(Template.load(out).histogram, detection_histogram(target)) == pytest.approx(1.0)


def test_alignment_error(tmp_path):
    left = [KeypointFrame(i, i * 0.1, Camera.LEFT, ()) for i in range(3)]
    right = [KeypointFrame(i + 10, (i + 10) * 0.1, Camera.RIGHT, ()) for i in range(3)]
    with pytest.raises(AlignmentError) as err:
        align_frames(left, right)
    assert err.value.frame_index == 0


def test_replay_alignment_exit_code(tmp_path, caplog):
    l, r = tmp_path / "l.jsonl", tmp_path / "r.jsonl"
    l.write_text('{"frame":0,"t":0.0,"camera":"left","people":[]}\n')
    r.write_text('{"frame":5,"t":0.5,"camera":"right","people":[]}\n')
    assert main(["replay", str(l), str(r), "--assume-single-person", "--out", str(tmp_path / "o")]) == 2
    assert "frame" in caplog.text


def test_replay_requires_template_or_single_person(tmp_path):
    l = tmp_path / "l.jsonl"
    l.write_text('{"frame":0,"t":0.0,"camera":"left","people":[]}\n')
    assert main(["replay", str(l), str(l), "--out", str(tmp_path / "o")]) == 2


def _native_record(rig, cam_sign, z):
    flat = []
    # BODY-25 layout: COCO points plus mid-hip at 8 and six foot points at the end
    coco = {2: (-0.2, 0.25), 5: (0.2, 0.25), 8: (-0.15, -0.25), 11: (0.15, -0.25), 0: (0.0, 0.6), 1: (0.0, 0.35)}
    body25_of = dict(enumerate((0, 1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18)))
    pts = [(0.0, 0.0, 0.0)] * 25
    for c, (x, y) in coco.items():
        p = project(rig, (x, -y, z))
        u = p.u_left if cam_sign < 0 else p.u_right
        pts[body25_of[c]] = (u, p.v_left, 0.8)
    for tr in pts:
        flat.extend(tr)
    return json.dumps({"version": 1.3, "people": [{"pose_keypoints_2d": flat}]})


def test_native_three_frame_replay(tmp_path):
    rig = StereoRig.reference()
    l, r = tmp_path / "l.jsonl", tmp_path / "r.jsonl"
    l.write_text("".join(_native_record(rig, -1, z) + "\n" for z in (3.0, 2.9, 2.8)))
    r.write_text("".join(_native_record(rig, 1, z) + "\n" for z in (3.0, 2.9, 2.8)))
    out = tmp_path / "o"
    assert main(["replay", str(l), str(r), "--assume-single-person", "--out", str(out)]) == 0
    rows = read_csv_rows(out / "trace.csv")
    assert [float(z) for _, z in rows] == pytest.approx([3.0, 2.9, 2.8], abs=1e-9)
    trace = Trace.from_jsonl((out / "trace.jsonl").read_text())
    assert all(rec.track_mode == "TRACKING" for rec in trace)


def test_unparsable_log_exit_code(tmp_path, caplog):
    l = tmp_path / "l.jsonl"
    l.write_text('{"frame":0,"t":0.0,"camera":"left","people":[]}\nnot json\n')
    assert main(["replay", str(l), str(l), "--assume-single-person", "--out", str(tmp_path / "o")]) == 2
    assert "line 2" in caplog.text
