"""File formats: detection input (JSON), tracking results (JSONL).

Detections arrive as one JSON document holding every frame of one or more
scenes. Results and ground truth share a line-oriented format: a header
line with the schema version, then one record per line in a fixed key
order, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Dict, IO, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .geometry import BoxState, wrap_angle
from .preprocessing import DetectionFrame

SCHEMA_VERSION = 1
RESULTS_KIND = "tracking_results"

# Unit-quaternion tolerance: inputs further than this from unit norm are
# rejected rather than silently normalised.
_QUAT_NORM_TOL = 1e-6


class SchemaError(ValueError):
    """Raised when an input file does not match the expected schema."""


def quaternion_to_yaw(q: Sequence[float]) -> float:
    """Heading angle from a [w, x, y, z] unit quaternion."""
    if len(q) != 4:
        raise SchemaError("quaternion must have 4 components [w, x, y, z]")
    w, x, y, z = (float(v) for v in q)
    norm = math.sqrt(w * w + x * x + y * y + z * z)
    if abs(norm - 1.0) > _QUAT_NORM_TOL:
        raise SchemaError(f"quaternion norm {norm:.8f} is not 1")
    return wrap_angle(math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)))


def _finite_floats(values: Any, n: int, where: str) -> List[float]:
    if not isinstance(values, (list, tuple)) or len(values) != n:
        raise SchemaError(f"{where}: expected a list of {n} numbers")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise SchemaError(f"{where}: entries must be finite numbers")
        out.append(float(v))
    return out


def _parse_box(raw: Any, where: str) -> BoxState:
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{where}: box must be an object")
    known = {"center", "size", "yaw", "quaternion", "velocity", "category", "score"}
    extra = set(raw) - known
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
    for key in ("center", "size", "category", "score"):
        if key not in raw:
            raise SchemaError(f"{where}: missing required key {key!r}")
    cx, cy, cz = _finite_floats(raw["center"], 3, f"{where}.center")
    w, l, h = _finite_floats(raw["size"], 3, f"{where}.size")
    if "yaw" in raw and "quaternion" in raw:
        raise SchemaError(f"{where}: give yaw or quaternion, not both")
    if "yaw" in raw:
        (yaw,) = _finite_floats([raw["yaw"]], 1, f"{where}.yaw")
    elif "quaternion" in raw:
        try:
            yaw = quaternion_to_yaw(_finite_floats(raw["quaternion"], 4, f"{where}.quaternion"))
        except SchemaError as exc:
            raise SchemaError(f"{where}.quaternion: {exc}") from None
    else:
        raise SchemaError(f"{where}: missing yaw or quaternion")
    vx: Optional[float] = None
    vy: Optional[float] = None
    if raw.get("velocity") is not None:
        vx, vy = _finite_floats(raw["velocity"], 2, f"{where}.velocity")
    if not isinstance(raw["category"], str) or not raw["category"]:
        raise SchemaError(f"{where}.category must be a non-empty string")
    score = raw["score"]
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise SchemaError(f"{where}.score must be a number")
    try:
        return BoxState(
            x=cx, y=cy, z=cz, w=w, l=l, h=h, yaw=yaw,
            category=raw["category"], score=float(score), vx=vx, vy=vy,
        )
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _box_to_dict(box: BoxState) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "center": [box.x, box.y, box.z],
        "size": [box.w, box.l, box.h],
        "yaw": box.yaw,
    }
    if box.vx is not None and box.vy is not None:
        out["velocity"] = [box.vx, box.vy]
    out["category"] = box.category
    out["score"] = box.score
    return out


def load_detections(source: Union[str, IO[str]]) -> Dict[str, List[DetectionFrame]]:
    """Read a detection file; returns frames per scene, time-ordered.

    Frames of a scene are sorted by timestamp; duplicate or non-increasing
    timestamps and duplicate frame ids are schema errors.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return load_detections(fh)
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(data, Mapping):
        raise SchemaError("detection file root must be an object")
    extra = set(data) - {"schema_version", "frames"}
    if extra:
        raise SchemaError(f"unknown top-level keys {sorted(extra)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {data.get('schema_version')!r}")
    raw_frames = data.get("frames")
    if not isinstance(raw_frames, list):
        raise SchemaError("frames must be a list")

    scenes: Dict[str, List[DetectionFrame]] = {}
    for idx, raw in enumerate(raw_frames):
        where = f"frames[{idx}]"
        if not isinstance(raw, Mapping):
            raise SchemaError(f"{where}: frame must be an object")
        extra = set(raw) - {"scene_id", "frame_id", "timestamp_s", "boxes"}
        if extra:
            raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
        scene_id = raw.get("scene_id")
        if not isinstance(scene_id, str) or not scene_id:
            raise SchemaError(f"{where}.scene_id must be a non-empty string")
        frame_id = raw.get("frame_id")
        if not isinstance(frame_id, int) or isinstance(frame_id, bool) or frame_id < 0:
            raise SchemaError(f"{where}.frame_id must be an int >= 0")
        ts = raw.get("timestamp_s")
        if isinstance(ts, bool) or not isinstance(ts, (int, float)) or not math.isfinite(ts):
            raise SchemaError(f"{where}.timestamp_s must be a finite number")
        raw_boxes = raw.get("boxes")
        if not isinstance(raw_boxes, list):
            raise SchemaError(f"{where}.boxes must be a list")
        boxes = [_parse_box(b, f"{where}.boxes[{i}]") for i, b in enumerate(raw_boxes)]
        scenes.setdefault(scene_id, []).append(DetectionFrame(frame_id, float(ts), boxes))

    for scene_id, frames in scenes.items():
        frames.sort(key=lambda f: f.timestamp_s)
        seen_ids = set()
        for a, b in zip(frames, frames[1:]):
            if not b.timestamp_s > a.timestamp_s:
                raise SchemaError(
                    f"scene {scene_id!r}: timestamps must be strictly increasing "
                    f"(frame {a.frame_id} at {a.timestamp_s} vs frame {b.frame_id} at {b.timestamp_s})"
                )
        for f in frames:
            if f.frame_id in seen_ids:
                raise SchemaError(f"scene {scene_id!r}: duplicate frame_id {f.frame_id}")
            seen_ids.add(f.frame_id)
    return scenes


def write_detections(scenes: Mapping[str, Sequence[DetectionFrame]], path: str) -> None:
    frames = []
    for scene_id in scenes:
        for f in scenes[scene_id]:
            frames.append(
                {
                    "scene_id": scene_id,
                    "frame_id": f.frame_id,
                    "timestamp_s": f.timestamp_s,
                    "boxes": [_box_to_dict(b) for b in f.detections],
                }
            )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"schema_version": SCHEMA_VERSION, "frames": frames}, fh)
        fh.write("\n")


# Fixed serialisation order for result records.
RESULT_FIELDS: Tuple[str, ...] = (
    "scene_id", "frame_id", "tracking_id", "category",
    "x", "y", "z", "w", "l", "h", "yaw", "vx", "vy", "tracking_score",
)


@dataclass(frozen=True)
class ResultRecord:
    """One tracked box in one frame, as written to the results file."""

    scene_id: str
    frame_id: int
    tracking_id: int
    category: str
    x: float
    y: float
    z: float
    w: float
    l: float
    h: float
    yaw: float
    vx: float
    vy: float
    tracking_score: float

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in RESULT_FIELDS})


def write_results(records: Iterable[ResultRecord], path: str) -> None:
    """Write header plus one record per line; streaming, fixed key order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema_version": SCHEMA_VERSION, "kind": RESULTS_KIND}))
        fh.write("\n")
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


_INT_FIELDS = {"frame_id", "tracking_id"}
_STR_FIELDS = {"scene_id", "category"}


def load_results(source: Union[str, IO[str]]) -> List[ResultRecord]:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return load_results(fh)
    header_line = source.readline()
    if not header_line.strip():
        raise SchemaError("results file is empty (missing header line)")
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid header line: {exc}") from None
    if not isinstance(header, Mapping) or header.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("header must carry the supported schema_version")
    if header.get("kind") != RESULTS_KIND:
        raise SchemaError(f"unexpected file kind {header.get('kind')!r}")

    records: List[ResultRecord] = []
    for lineno, line in enumerate(source, start=2):
        if not line.strip():
            continue
        where = f"line {lineno}"
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{where}: invalid JSON: {exc}") from None
        if not isinstance(raw, Mapping):
            raise SchemaError(f"{where}: record must be an object")
        missing = set(RESULT_FIELDS) - set(raw)
        if missing:
            raise SchemaError(f"{where}: missing keys {sorted(missing)}")
        extra = set(raw) - set(RESULT_FIELDS)
        if extra:
            raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
        kwargs: Dict[str, Any] = {}
        for key in RESULT_FIELDS:
            v = raw[key]
            if key in _STR_FIELDS:
                if not isinstance(v, str) or not v:
                    raise SchemaError(f"{where}.{key} must be a non-empty string")
            elif key in _INT_FIELDS:
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise SchemaError(f"{where}.{key} must be an int >= 0")
            else:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise SchemaError(f"{where}.{key} must be a finite number")
                v = float(v)
            kwargs[key] = v
        records.append(ResultRecord(**kwargs))
    return records


def records_by_scene(records: Iterable[ResultRecord]) -> Dict[str, List[ResultRecord]]:
    out: Dict[str, List[ResultRecord]] = {}
    for rec in records:
        out.setdefault(rec.scene_id, []).append(rec)
    return out
