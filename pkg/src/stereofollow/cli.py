"""Command-line front end.

    stereofollow run SCENARIO [--out DIR] [--seed N] [--set key=value ...] [--export-logs]
    stereofollow replay LEFT.jsonl RIGHT.jsonl [--template T.json] [--assume-single-person]
    stereofollow make-template INPUT --label NAME --out T.json
    stereofollow validate SCENARIO [--set key=value ...]

Exit status: 0 success, 1 runtime failure, 2 bad input (missing file, invalid
scenario, unparsable or unalignable logs, no usable appearance data).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .appearance import Template, as_hsv_array, rgb_to_hsv_array
from .control import ControlGains, ControllerConfig
from .detection import (
    Camera,
    KeypointFrame,
    dump_keypoint_log,
    parse_keypoint_frames,
    torso_region,
)
from .errors import (
    AlignmentError,
    LogParseError,
    NoAppearanceDataError,
    NoTorsoError,
    ParameterError,
    ScenarioValidationError,
)
from .geometry import StereoRig
from .pipeline import FollowPipeline
from .sim import load_scenario, run_scenario
from .sim.runner import record_from_result
from .sim.scenario import load_template
from .trace import Trace, compute_metrics
from .tracker import TrackerConfig

log = logging.getLogger("stereofollow")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _not_found(exc: FileNotFoundError) -> None:
    log.error("file not found: %s", exc.filename if exc.filename else str(exc).removeprefix("scenario file not found: "))


def _write_outputs(trace: Trace, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.jsonl").write_text(trace.to_jsonl(), encoding="utf-8")
    (out_dir / "trace.csv").write_text(trace.to_csv(), encoding="utf-8")
    (out_dir / "metrics.json").write_text(compute_metrics(trace).dumps(), encoding="utf-8")


def cmd_run(scenario_path: str, out_dir: str | None, overrides: list[str],
            seed: int | None = None, export_logs: bool = False) -> int:
    overrides = list(overrides)
    if seed is not None:
        overrides.append(f"seed={seed}")
    try:
        scenario = load_scenario(scenario_path, overrides)
    except FileNotFoundError as exc:
        _not_found(exc)
        return EXIT_INPUT
    except (ScenarioValidationError, ParameterError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    out = Path(out_dir) if out_dir else Path("out") / scenario.name
    result = run_scenario(scenario, record_detections=export_logs)
    _write_outputs(result.trace, out)
    if export_logs:
        (out / "left.jsonl").write_text(dump_keypoint_log(result.frames[Camera.LEFT]), encoding="utf-8")
        (out / "right.jsonl").write_text(dump_keypoint_log(result.frames[Camera.RIGHT]), encoding="utf-8")
        load_template(scenario.template, scenario).save(out / "template.json")
    m = compute_metrics(result.trace)
    log.info("%s: %d frames, %d tracking, %d occlusion episodes -> %s",
             scenario.name, m.frames_total, m.frames_tracking, m.occlusion_episodes, out)
    return EXIT_OK


def _index_frames(frames: list[KeypointFrame]) -> dict[int, KeypointFrame]:
    out: dict[int, KeypointFrame] = {}
    for f in frames:
        if f.frame_index in out:
            out[f.frame_index].people.extend(f.people)
        else:
            out[f.frame_index] = KeypointFrame(f.frame_index, f.timestamp_s, f.camera, list(f.people))
    return out


def align_frames(left: list[KeypointFrame], right: list[KeypointFrame]) -> list[tuple[KeypointFrame, KeypointFrame]]:
    """Pair frames by equal frame index; both streams must cover the same indices."""
    li, ri = _index_frames(left), _index_frames(right)
    if not li or not ri:
        raise AlignmentError("a keypoint log contains no frames")
    mismatched = sorted(set(li) ^ set(ri))
    if mismatched:
        first = mismatched[0]
        side = "left" if first in li else "right"
        raise AlignmentError(
            f"frame {first} appears only in the {side} log ({len(mismatched)} unmatched frames)", first
        )
    return [(li[k], ri[k]) for k in sorted(li)]


def replay_frames(
    pairs: list[tuple[KeypointFrame, KeypointFrame]],
    pipeline: FollowPipeline,
    dt: float | None = None,
) -> Trace:
    idx = [lf.frame_index for lf, _ in pairs]
    if dt is None:
        if len(pairs) >= 2 and idx[-1] > idx[0]:
            dt = (pairs[-1][0].timestamp_s - pairs[0][0].timestamp_s) / (idx[-1] - idx[0])
        if dt is None or not dt > 0:
            dt = 0.1
    trace = Trace()
    if pipeline.template is not None:
        ids = {d.person_id for lf, rf in pairs for d in lf.people + rf.people}
        if pipeline.template.label in ids:
            trace.target_id = pipeline.template.label
    prev = None
    for lf, rf in pairs:
        step = dt if prev is None else dt * (lf.frame_index - prev)
        prev = lf.frame_index
        result = pipeline.process({Camera.LEFT: lf.people, Camera.RIGHT: rf.people}, lf.timestamp_s, step)
        trace.append(record_from_result(result))
    return trace


def _read_log(path: str, camera: Camera) -> list[KeypointFrame]:
    with open(path, encoding="utf-8") as fh:
        return parse_keypoint_frames(fh, camera=camera)


def cmd_replay(left_log: str, right_log: str, template_path: str | None, rig: StereoRig,
               out_dir: str | None, assume_single_person: bool = False,
               tracker_cfg: TrackerConfig = TrackerConfig(), gains: ControlGains = ControlGains(),
               controller_cfg: ControllerConfig = ControllerConfig(), dt: float | None = None) -> int:
    try:
        template = Template.load(template_path) if template_path else None
        left = _read_log(left_log, Camera.LEFT)
        right = _read_log(right_log, Camera.RIGHT)
        pairs = align_frames(left, right)
    except FileNotFoundError as exc:
        _not_found(exc)
        return EXIT_INPUT
    except AlignmentError as exc:
        log.error("cannot align logs: %s (first mismatching frame index %s)", exc, exc.frame_index)
        return EXIT_INPUT
    except (LogParseError, ParameterError, NoAppearanceDataError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    if template is None and not assume_single_person:
        log.error("--template is required unless --assume-single-person is given")
        return EXIT_INPUT
    pipeline = FollowPipeline(rig, template, tracker_cfg, gains, controller_cfg, assume_single_person)
    trace = replay_frames(pairs, pipeline, dt)
    _write_outputs(trace, Path(out_dir) if out_dir else Path("out") / "replay")
    return EXIT_OK


def _pixels_from_input(path: str, frame: int | None) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, dict) and ("hsv" in doc or "rgb" in doc):
            if "hsv" in doc:
                return as_hsv_array(doc["hsv"])
            return rgb_to_hsv_array(doc["rgb"])
    chunks = []
    for f in parse_keypoint_frames(text, camera=Camera.LEFT):
        if frame is not None and f.frame_index != frame:
            continue
        for d in f.people:
            try:
                torso_region(d)
            except NoTorsoError:
                continue
            if len(d.torso_pixels):
                chunks.append(d.torso_pixels)
    if not chunks:
        raise NoAppearanceDataError("no detection with a valid torso and pixels in the input")
    return np.concatenate(chunks)


def cmd_make_template(input_path: str, label: str, out_path: str,
                      min_saturation: float = 0.1, frame: int | None = None) -> int:
    try:
        pixels = _pixels_from_input(input_path, frame)
        template = Template.from_pixels(pixels, label=label, min_saturation=min_saturation)
    except FileNotFoundError as exc:
        _not_found(exc)
        return EXIT_INPUT
    except NoAppearanceDataError as exc:
        log.error("no-appearance-data: %s", exc)
        return EXIT_INPUT
    except (LogParseError, ParameterError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    template.save(out_path)
    log.info("template %r: %d pixels, peak bin %d", label, template.histogram.sample_count,
             template.histogram.argmax_bin())
    return EXIT_OK


def cmd_validate(scenario_path: str, overrides: list[str]) -> int:
    try:
        sc = load_scenario(scenario_path, overrides)
    except FileNotFoundError as exc:
        _not_found(exc)
        return EXIT_INPUT
    except (ScenarioValidationError, ParameterError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    print(f"{sc.name}: ok ({len(sc.persons)} persons, {sc.n_frames} frames at {sc.dt} s)")
    return EXIT_OK


def _resolution(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stereofollow", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a simulated scenario")
    r.add_argument("scenario", help="scenario file, or the name of a shipped scenario")
    r.add_argument("--out", help="output directory (default out/<scenario name>)")
    r.add_argument("--seed", type=int)
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--export-logs", action="store_true",
                   help="also write left.jsonl/right.jsonl keypoint logs and template.json")

    rp = sub.add_parser("replay", help="replay recorded left/right keypoint logs")
    rp.add_argument("left_log")
    rp.add_argument("right_log")
    rp.add_argument("--template")
    rp.add_argument("--out")
    rp.add_argument("--assume-single-person", action="store_true",
                    help="skip the color gate on frames with exactly one person per camera")
    rp.add_argument("--scenario", help="take rig, tracker and controller settings from this scenario")
    rp.add_argument("--baseline-m", type=float)
    rp.add_argument("--hfov-deg", type=float)
    rp.add_argument("--resolution", type=_resolution)
    rp.add_argument("--dt", type=float, help="frame period in seconds (default: from timestamps)")
    rp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    mt = sub.add_parser("make-template", help="build a hue template from a keypoint log or pixel file")
    mt.add_argument("input")
    mt.add_argument("--label", default="target")
    mt.add_argument("--out", required=True)
    mt.add_argument("--min-saturation", type=float, default=0.1)
    mt.add_argument("--frame", type=int, help="only use this frame index of a keypoint log")

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario")
    v.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.scenario, args.out, args.overrides, args.seed, args.export_logs)
    if args.command == "make-template":
        return cmd_make_template(args.input, args.label, args.out, args.min_saturation, args.frame)
    if args.command == "validate":
        return cmd_validate(args.scenario, args.overrides)

    tracker_cfg, gains, controller_cfg = TrackerConfig(), ControlGains(), ControllerConfig()
    rig = StereoRig.reference()
    if args.scenario:
        try:
            sc = load_scenario(args.scenario, args.overrides)
        except (FileNotFoundError, ScenarioValidationError, ParameterError) as exc:
            log.error("%s", exc)
            return EXIT_INPUT
        rig, tracker_cfg, gains, controller_cfg = sc.rig, sc.tracker, sc.gains, sc.controller
    if args.baseline_m or args.hfov_deg or args.resolution:
        try:
            rig = StereoRig.from_fov(
                args.baseline_m or rig.baseline_m,
                args.resolution or rig.resolution,
                args.hfov_deg or rig.hfov_deg,
            )
        except ParameterError as exc:
            log.error("%s", exc)
            return EXIT_INPUT
    return cmd_replay(args.left_log, args.right_log, args.template, rig, args.out,
                      args.assume_single_person, tracker_cfg, gains, controller_cfg, args.dt)


if __name__ == "__main__":
    sys.exit(main())
