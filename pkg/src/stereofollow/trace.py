"""Per-frame trace records, summary metrics, and their file formats."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

SCHEMA_VERSION = 1


@dataclass
class TraceRecord:
    t_s: float
    track_mode: str
    v_cmd: float
    w_cmd: float
    engaged: bool = False
    estimated_z_m: float | None = None
    bearing_rad: float | None = None
    similarity_left: float | None = None
    similarity_right: float | None = None
    true_distance_m: float | None = None
    # simulation ground truth
    chosen_id: str | None = None
    target_similarity_left: float | None = None
    target_similarity_right: float | None = None

    def to_json(self) -> str:
        doc = {"schema_version": SCHEMA_VERSION}
        for k, v in asdict(self).items():
            if isinstance(v, float) and math.isnan(v):
                v = None
            doc[k] = v
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> TraceRecord:
        doc = json.loads(text)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in doc.items() if k in names})


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    target_id: str | None = None

    def append(self, rec: TraceRecord) -> None:
        if self.records and not rec.t_s > self.records[-1].t_s:
            raise ValueError("trace timestamps must be strictly increasing")
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def estimated_z(self) -> list[float | None]:
        return [r.estimated_z_m for r in self.records]

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> Trace:
        return cls([TraceRecord.from_json(line) for line in text.splitlines() if line.strip()])

    def to_csv(self) -> str:
        """Two columns, time and estimated depth; the depth cell is empty when not tracking."""
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_s", "estimated_z_m"])
        for r in self.records:
            w.writerow([repr(r.t_s), "" if r.estimated_z_m is None else repr(r.estimated_z_m)])
        return buf.getvalue()


@dataclass
class Metrics:
    frames_total: int
    frames_tracking: int
    identity_switches: int
    occlusion_episodes: int
    max_reacquire_time_s: float
    mean_abs_distance_error_m: float | None
    min_true_distance_m: float | None
    unrecovered_episode: bool = False
    first_engaged_t_s: float | None = None

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def occlusion_episodes(trace: Trace) -> list[tuple[int, int]]:
    """Runs of non-TRACKING frames after a TRACKING frame.

    Each is (index of first missed frame, index of reacquiring frame), the
    second being ``len(trace)`` when the target never came back.
    """
    out = []
    seen = False
    start = None
    for i, r in enumerate(trace.records):
        tracking = r.track_mode == "TRACKING"
        if tracking:
            if start is not None:
                out.append((start, i))
                start = None
            seen = True
        elif seen and start is None:
            start = i
    if start is not None:
        out.append((start, len(trace.records)))
    return out


def identity_switches(trace: Trace) -> int:
    """Changes of the fused identity between consecutive tracked frames.

    Starts from the known target id when there is one, so tracking the wrong
    person from the first frame counts as a switch.
    """
    prev = trace.target_id
    switches = 0
    for r in trace.records:
        if r.track_mode != "TRACKING" or r.chosen_id is None:
            continue
        if prev is not None and r.chosen_id != prev:
            switches += 1
        prev = r.chosen_id
    return switches


def compute_metrics(trace: Trace) -> Metrics:
    recs = trace.records
    episodes = occlusion_episodes(trace)
    reacq = [recs[end].t_s - recs[start].t_s for start, end in episodes if end < len(recs)]
    engaged_idx = next((i for i, r in enumerate(recs) if r.engaged), None)
    errors = []
    if engaged_idx is not None:
        errors = [
            abs(r.estimated_z_m - r.true_distance_m)
            for r in recs[engaged_idx:]
            if r.estimated_z_m is not None and r.true_distance_m is not None
        ]
    truths = [r.true_distance_m for r in recs if r.true_distance_m is not None]
    return Metrics(
        frames_total=len(recs),
        frames_tracking=sum(r.track_mode == "TRACKING" for r in recs),
        identity_switches=identity_switches(trace),
        occlusion_episodes=len(episodes),
        max_reacquire_time_s=max(reacq, default=0.0),
        mean_abs_distance_error_m=sum(errors) / len(errors) if errors else None,
        min_true_distance_m=min(truths) if truths else None,
        unrecovered_episode=bool(episodes) and episodes[-1][1] == len(recs),
        first_engaged_t_s=None if engaged_idx is None else recs[engaged_idx].t_s,
    )
