"""Scenario files: TOML documents describing the rig, people, lighting, noise and tuning.

Every problem found during validation is collected and reported together as
a :class:`ScenarioValidationError` listing (dotted field path, reason).
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..appearance import Template
from ..control import ControlGains, ControllerConfig, PidGains
from ..errors import ParameterError, ScenarioValidationError
from ..geometry import StereoRig
from ..tracker import TrackerConfig
from .world import BodyGeometry, LightingSchedule, NoiseModel, PersonModel, RobotState


@dataclass(frozen=True)
class TemplateSource:
    """Where the run's template comes from: a person's clothing model, explicit hue stats, or a file."""

    person: str | None = None
    hue_deg: float | None = None
    hue_std_deg: float = 8.0
    saturation: float = 0.8
    path: str | None = None
    samples: int = 500


@dataclass
class Scenario:
    name: str
    duration_s: float
    dt: float
    seed: int
    rig: StereoRig
    mount_height_m: float
    robot: RobotState
    persons: tuple[PersonModel, ...]
    target_id: str | None
    template: TemplateSource
    lighting: LightingSchedule
    noise: NoiseModel
    tracker: TrackerConfig
    gains: ControlGains
    controller: ControllerConfig
    description: str = ""
    source_dir: Path | None = field(default=None, repr=False)

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s / self.dt))

    def person(self, pid: str) -> PersonModel:
        for p in self.persons:
            if p.id == pid:
                return p
        raise KeyError(pid)


_TOP_KEYS = {
    "name", "description", "duration_s", "dt", "seed", "target", "rig", "robot",
    "template", "persons", "lighting", "noise", "tracker", "controller",
}


class _Checker:
    def __init__(self) -> None:
        self.problems: list[tuple[str, str]] = []

    def fail(self, path: str, reason: str) -> None:
        self.problems.append((path, reason))

    def number(self, doc: dict, key: str, path: str, default=None, *, lo=None, hi=None,
               lo_open=False, hi_open=False, integer=False):
        full = f"{path}.{key}" if path else key
        if key not in doc:
            if default is None:
                self.fail(full, "required")
            return default
        val = doc[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail(full, f"expected a number, got {val!r}")
            return default
        if integer and not float(val).is_integer():
            self.fail(full, f"expected an integer, got {val!r}")
            return default
        if not math.isfinite(val):
            self.fail(full, "must be finite")
            return default
        if lo is not None and (val <= lo if lo_open else val < lo):
            self.fail(full, f"must be {'>' if lo_open else '>='} {lo}, got {val}")
        if hi is not None and (val >= hi if hi_open else val > hi):
            self.fail(full, f"must be {'<' if hi_open else '<='} {hi}, got {val}")
        return int(val) if integer else float(val)

    def table(self, doc: dict, key: str, allowed: set[str]) -> dict:
        val = doc.get(key, {})
        if not isinstance(val, dict):
            self.fail(key, "expected a table")
            return {}
        for extra in sorted(set(val) - allowed):
            self.fail(f"{key}.{extra}", "unknown field")
        return val

    def pairs(self, val, path: str, width: int) -> tuple:
        if not isinstance(val, list) or not all(
            isinstance(r, list) and len(r) == width
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r)
            for r in val
        ):
            self.fail(path, f"expected a list of [{', '.join(['number'] * width)}] rows")
            return ()
        return tuple(tuple(float(x) for x in r) for r in val)


def _gains(c: _Checker, doc: dict, key: str, default: PidGains) -> PidGains:
    sub = doc.get(key, {})
    path = f"controller.{key}"
    if not isinstance(sub, dict):
        c.fail(path, "expected a table")
        return default
    for extra in sorted(set(sub) - {"kp", "ki", "kd", "integral_limit"}):
        c.fail(f"{path}.{extra}", "unknown field")
    return PidGains(
        kp=c.number(sub, "kp", path, default.kp, lo=0.0),
        ki=c.number(sub, "ki", path, default.ki, lo=0.0),
        kd=c.number(sub, "kd", path, default.kd, lo=0.0),
        integral_limit=c.number(sub, "integral_limit", path, default.integral_limit, lo=0.0, lo_open=True),
    )


def _safe(c: _Checker, path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ParameterError as exc:
        c.fail(path, str(exc))
        return None


def scenario_from_dict(doc: dict[str, Any], source_dir: Path | None = None) -> Scenario:
    c = _Checker()
    if not isinstance(doc, dict):
        raise ScenarioValidationError([("<root>", "expected a table")])
    for extra in sorted(set(doc) - _TOP_KEYS):
        c.fail(extra, "unknown field")

    name = str(doc.get("name", "scenario"))
    duration = c.number(doc, "duration_s", "", lo=0.0, lo_open=True)
    dt = c.number(doc, "dt", "", 0.1, lo=0.0, lo_open=True)
    seed = c.number(doc, "seed", "", 0, lo=0, integer=True)

    rd = c.table(doc, "rig", {"baseline_m", "resolution", "hfov_deg", "principal_point", "mount_height_m"})
    baseline = c.number(rd, "baseline_m", "rig", 0.094, lo=0.0, lo_open=True)
    hfov = c.number(rd, "hfov_deg", "rig", 54.0, lo=0.0, hi=180.0, lo_open=True, hi_open=True)
    mount = c.number(rd, "mount_height_m", "rig", 1.15, lo=0.0, lo_open=True)
    res = rd.get("resolution", [640, 480])
    if not (isinstance(res, list) and len(res) == 2 and all(isinstance(x, int) and x > 0 for x in res)):
        c.fail("rig.resolution", "expected [width, height] positive integers")
        res = [640, 480]
    pp = rd.get("principal_point")
    if pp is not None and not (isinstance(pp, list) and len(pp) == 2):
        c.fail("rig.principal_point", "expected [cx, cy]")
        pp = None
    rig = _safe(c, "rig", StereoRig.from_fov, baseline, tuple(res), hfov, tuple(pp) if pp else None)

    rb = c.table(doc, "robot", {"x", "y", "theta"})
    robot = RobotState(c.number(rb, "x", "robot", 0.0), c.number(rb, "y", "robot", 0.0),
                       c.number(rb, "theta", "robot", 0.0))

    persons = []
    raw_persons = doc.get("persons", [])
    if not isinstance(raw_persons, list):
        c.fail("persons", "expected an array of tables")
        raw_persons = []
    seen_ids = set()
    person_keys = {"id", "waypoints", "hue_deg", "hue_std_deg", "saturation", "value", "body"}
    for i, pd in enumerate(raw_persons):
        path = f"persons.{i}"
        if not isinstance(pd, dict):
            c.fail(path, "expected a table")
            continue
        for extra in sorted(set(pd) - person_keys):
            c.fail(f"{path}.{extra}", "unknown field")
        pid = str(pd.get("id", f"person{i}"))
        if pid in seen_ids:
            c.fail(f"{path}.id", f"duplicate id {pid!r}")
        seen_ids.add(pid)
        wps = c.pairs(pd.get("waypoints"), f"{path}.waypoints", 3)
        if wps and any(b[0] <= a[0] for a, b in zip(wps, wps[1:])):
            c.fail(f"{path}.waypoints", "times must be strictly increasing")
            wps = ()
        if "waypoints" in pd and not wps:
            continue
        if not wps:
            c.fail(f"{path}.waypoints", "required")
            continue
        bd = pd.get("body", {})
        body = BodyGeometry(**{k: float(v) for k, v in bd.items()}) if isinstance(bd, dict) else None
        if body is None or not body.radius > 0:
            c.fail(f"{path}.body", "invalid body geometry (radius must be > 0)")
            body = BodyGeometry()
        person = _safe(
            c, path, PersonModel, pid, wps,
            clothing_hue_deg=c.number(pd, "hue_deg", path, 0.0) % 360.0,
            clothing_hue_std_deg=c.number(pd, "hue_std_deg", path, 8.0, lo=0.0),
            clothing_saturation=c.number(pd, "saturation", path, 0.8, lo=0.0, hi=1.0),
            clothing_value=c.number(pd, "value", path, 0.8, lo=0.0, hi=1.0, lo_open=True),
            body=body,
        )
        if person is not None:
            persons.append(person)

    target = doc.get("target")
    if target is not None and target not in seen_ids:
        c.fail("target", f"no person with id {target!r}")
    if target is None and persons:
        target = persons[0].id

    td = c.table(doc, "template", {"person", "hue_deg", "hue_std_deg", "saturation", "path", "samples"})
    tsrc = TemplateSource(
        person=td.get("person"),
        hue_deg=c.number(td, "hue_deg", "template", None) if "hue_deg" in td else None,
        hue_std_deg=c.number(td, "hue_std_deg", "template", 8.0, lo=0.0),
        saturation=c.number(td, "saturation", "template", 0.8, lo=0.0, hi=1.0),
        path=td.get("path"),
        samples=c.number(td, "samples", "template", 500, lo=1, integer=True),
    )
    if tsrc.person is None and tsrc.hue_deg is None and tsrc.path is None:
        if target is None:
            c.fail("template", "no persons: give template.hue_deg or template.path")
        else:
            tsrc = TemplateSource(person=target, samples=tsrc.samples)
    if tsrc.person is not None and tsrc.person not in seen_ids:
        c.fail("template.person", f"no person with id {tsrc.person!r}")

    ld = c.table(doc, "lighting", {"keyframes", "period_s", "hue_jitter_std_deg"})
    keyframes = c.pairs(ld.get("keyframes", [[0.0, 1.0]]), "lighting.keyframes", 2)
    lighting = _safe(
        c, "lighting", LightingSchedule, keyframes or ((0.0, 1.0),),
        c.number(ld, "period_s", "lighting", None, lo=0.0, lo_open=True) if "period_s" in ld else None,
        c.number(ld, "hue_jitter_std_deg", "lighting", 0.0, lo=0.0),
    ) or LightingSchedule()

    nd = c.table(doc, "noise", {"keypoint_noise_std_px", "quantize_pixels", "detection_dropout_prob", "dropout_curve"})
    quant = nd.get("quantize_pixels", False)
    if not isinstance(quant, bool):
        c.fail("noise.quantize_pixels", "expected true or false")
        quant = False
    noise = _safe(
        c, "noise", NoiseModel,
        c.number(nd, "keypoint_noise_std_px", "noise", 0.0, lo=0.0),
        quant,
        c.number(nd, "detection_dropout_prob", "noise", 0.0, lo=0.0, hi=1.0, hi_open=True),
        c.pairs(nd.get("dropout_curve", []), "noise.dropout_curve", 2),
        seed if isinstance(seed, int) else 0,
    ) or NoiseModel()

    trd = c.table(doc, "tracker", {"threshold", "epipolar_tol", "t_lost", "min_saturation"})
    tracker = _safe(
        c, "tracker", TrackerConfig,
        c.number(trd, "threshold", "tracker", 0.6, lo=0.0, hi=1.0, lo_open=True, hi_open=True),
        c.number(trd, "epipolar_tol", "tracker", 20.0, lo=0.0),
        c.number(trd, "t_lost", "tracker", 2.0, lo=0.0, lo_open=True),
        c.number(trd, "min_saturation", "tracker", 0.1, lo=0.0, hi=1.0),
    ) or TrackerConfig()

    cd = c.table(doc, "controller", {
        "z_setpoint_m", "z_engage_m", "z_stop_m", "v_max", "w_max", "decel_time_s",
        "distance_gains", "heading_gains",
    })
    dflt = ControllerConfig()
    controller = _safe(
        c, "controller", ControllerConfig,
        c.number(cd, "z_setpoint_m", "controller", dflt.z_setpoint_m, lo=0.0, lo_open=True),
        c.number(cd, "z_engage_m", "controller", dflt.z_engage_m, lo=0.0, lo_open=True),
        c.number(cd, "z_stop_m", "controller", dflt.z_stop_m, lo=0.0, lo_open=True),
        c.number(cd, "v_max", "controller", dflt.v_max, lo=0.0, lo_open=True),
        c.number(cd, "w_max", "controller", dflt.w_max, lo=0.0, lo_open=True),
        c.number(cd, "decel_time_s", "controller", dflt.decel_time_s, lo=0.0, lo_open=True),
    ) or dflt
    dg = ControlGains()
    gains = ControlGains(
        distance=_gains(c, cd, "distance_gains", dg.distance),
        heading=_gains(c, cd, "heading_gains", dg.heading),
    )

    if c.problems:
        raise ScenarioValidationError(c.problems)
    return Scenario(
        name=name, duration_s=duration, dt=dt, seed=seed, rig=rig, mount_height_m=mount,
        robot=robot, persons=tuple(persons), target_id=target, template=tsrc, lighting=lighting,
        noise=noise, tracker=tracker, gains=gains, controller=controller,
        description=str(doc.get("description", "")), source_dir=source_dir,
    )


def parse_override(text: str) -> tuple[list[str], Any]:
    """Split ``a.b.0.c=value``; the value is read as a TOML literal, else kept as a string."""
    if "=" not in text:
        raise ParameterError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ParameterError(f"override {text!r} has an empty key")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key.split("."), value


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    doc = copy.deepcopy(doc)
    for text in overrides:
        path, value = parse_override(text)
        node: Any = doc
        for i, part in enumerate(path[:-1]):
            if isinstance(node, list):
                node = node[int(part)]
            else:
                nxt = path[i + 1]
                node = node.setdefault(part, [] if nxt.isdigit() else {})
        last = path[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return doc


def builtin_scenarios() -> list[str]:
    return sorted(
        p.name[:-5] for p in resources.files("stereofollow.scenarios").iterdir()
        if p.name.endswith(".toml")
    )


def resolve_scenario_path(name_or_path: str | Path) -> Path:
    """A real file path, or the name of a scenario shipped with the package."""
    p = Path(name_or_path)
    if p.exists():
        return p
    shipped = resources.files("stereofollow.scenarios") / f"{p.stem}.toml"
    if p.parent == Path(".") and shipped.is_file():
        return Path(str(shipped))
    raise FileNotFoundError(f"scenario file not found: {name_or_path}")


def load_raw(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_scenario(name_or_path: str | Path, overrides: list[str] | None = None) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    try:
        doc = load_raw(path)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioValidationError([("<file>", f"TOML syntax error: {exc}")]) from None
    try:
        doc = apply_overrides(doc, overrides or [])
    except (IndexError, ValueError, TypeError, AttributeError) as exc:
        raise ScenarioValidationError([("--set", str(exc))]) from None
    return scenario_from_dict(doc, source_dir=path.parent)


def load_template(src: TemplateSource, scenario: Scenario) -> Template:
    """Build or read the template a run starts from."""
    import numpy as np

    if src.path is not None:
        p = Path(src.path)
        if not p.is_absolute() and scenario.source_dir is not None:
            p = scenario.source_dir / p
        return Template.load(p)
    if src.person is not None:
        person = scenario.person(src.person)
        hue, std, sat = person.clothing_hue_deg, person.clothing_hue_std_deg, person.clothing_saturation
        label = person.id
    else:
        hue, std, sat, label = src.hue_deg, src.hue_std_deg, src.saturation, "template"
    # own stream so the template never shifts the detector's random draws
    rng = np.random.default_rng([scenario.seed, 1])
    h = (hue + std * rng.normal(0.0, 1.0, src.samples)) % 360.0
    pixels = np.column_stack([h, np.full(src.samples, sat), np.full(src.samples, 1.0)])
    return Template.from_pixels(pixels, label=label, min_saturation=scenario.tracker.min_saturation)
