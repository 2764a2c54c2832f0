"""Session data model: on-disk format, validation, and derived artifacts.

A session directory holds:

* ``manifest.json``   -- session metadata (see :class:`SessionManifest`)
* ``keypoints.jsonl`` -- one frame per line, streamable
* ``annotations.jsonl`` (optional) -- ground-truth command epochs

Keypoint groups that were not detected in a frame stay absent (``None``);
the loader never zero-fills.  A group in which any joint falls below the
confidence floor is treated as absent for that frame, because one bad
joint poisons every vector built from the group.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import (
    DimensionMismatch,
    IoFailure,
    MalformedRecord,
    MissingManifest,
    NonMonotonicFrameIndex,
)
from .geometry import ViewParams

log = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
KEYPOINTS_FILE = "keypoints.jsonl"
ANNOTATIONS_FILE = "annotations.jsonl"

DEFAULT_CONFIDENCE_FLOOR = 0.5


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.confidence]


@dataclass(frozen=True)
class ArmKeypoints:
    """Three ordered joints; the side fixes their roles.

    Left arm: (wrist, elbow, shoulder).  Right arm: (finger, wrist, elbow).
    """

    side: str  # "Left" | "Right"
    points: tuple[Keypoint, Keypoint, Keypoint]

    def __post_init__(self):
        if self.side not in ("Left", "Right"):
            raise ValueError(f"side must be Left or Right, got {self.side!r}")
        if len(self.points) != 3:
            raise ValueError("arm needs exactly 3 keypoints")


@dataclass(frozen=True)
class DogKeypoints:
    """Seven joints; ear and forelimb pairs are ordered (left, right)."""

    ears: tuple[Keypoint, Keypoint]
    neck: Keypoint
    scapula: Keypoint
    forelimbs: tuple[Keypoint, Keypoint]
    waist: Keypoint

    def all_points(self) -> list[Keypoint]:
        return [*self.ears, self.neck, self.scapula, *self.forelimbs, self.waist]


@dataclass(frozen=True)
class MarkerFrame:
    """Four corners in fixed order (top-left, top-right, bottom-right, bottom-left)."""

    corners: tuple[Keypoint, Keypoint, Keypoint, Keypoint]


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    timestamp_s: float
    left_arm: ArmKeypoints | None = None
    right_arm: ArmKeypoints | None = None
    dog: DogKeypoints | None = None
    marker: MarkerFrame | None = None


@dataclass
class SessionManifest:
    session_id: str
    dataset_name: str
    fps: float
    frame_count: int
    frame_width: int
    frame_height: int
    view: ViewParams
    ground_truth_command_count: int | None = None

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")

    def to_json_dict(self) -> dict:
        out = {
            "session_id": self.session_id,
            "dataset_name": self.dataset_name,
            "fps": self.fps,
            "frame_count": self.frame_count,
            "frame_width": self.frame_width,
            "frame_height": self.frame_height,
            "view": {
                "theta_deg": self.view.theta_deg,
                "phi_deg": self.view.phi_deg,
                "fov_deg": self.view.fov_deg,
                "pano_width": self.view.pano_width,
                "pano_height": self.view.pano_height,
            },
        }
        if self.ground_truth_command_count is not None:
            out["ground_truth_command_count"] = self.ground_truth_command_count
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "SessionManifest":
        view = data["view"]
        return cls(
            session_id=data["session_id"],
            dataset_name=data["dataset_name"],
            fps=float(data["fps"]),
            frame_count=int(data["frame_count"]),
            frame_width=int(data["frame_width"]),
            frame_height=int(data["frame_height"]),
            view=ViewParams(
                theta_deg=float(view["theta_deg"]),
                phi_deg=float(view["phi_deg"]),
                fov_deg=float(view["fov_deg"]),
                out_width=int(data["frame_width"]),
                out_height=int(data["frame_height"]),
                pano_width=int(view["pano_width"]),
                pano_height=int(view["pano_height"]),
            ),
            ground_truth_command_count=(
                int(data["ground_truth_command_count"])
                if data.get("ground_truth_command_count") is not None
                else None
            ),
        )


@dataclass(frozen=True)
class Annotation:
    """Ground-truth command epoch from a fixture's annotations file."""

    start_frame: int
    peak_frame: int
    end_frame: int
    category: str

    def to_json_dict(self) -> dict:
        return {
            "start_frame": self.start_frame,
            "peak_frame": self.peak_frame,
            "end_frame": self.end_frame,
            "category": self.category,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Annotation":
        return cls(
            start_frame=int(data["start_frame"]),
            peak_frame=int(data["peak_frame"]),
            end_frame=int(data["end_frame"]),
            category=str(data["category"]),
        )


@dataclass
class Session:
    """Loaded session: immutable once built, safe to share between readers."""

    manifest: SessionManifest
    frames: list[FrameRecord]
    annotations: list[Annotation] = field(default_factory=list)
    path: Path | None = None

    def __post_init__(self):
        self._by_index = {f.frame_index: f for f in self.frames}

    def frame_at(self, index: int) -> FrameRecord | None:
        return self._by_index.get(index)


# -- parsing ---------------------------------------------------------------


def _parse_point(raw, where: str) -> Keypoint:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ValueError(f"{where}: expected [x, y, c]")
    return Keypoint(float(raw[0]), float(raw[1]), float(raw[2]))


def _parse_points(raw, n: int, where: str) -> tuple[Keypoint, ...]:
    if not isinstance(raw, (list, tuple)) or len(raw) != n:
        raise ValueError(f"{where}: expected {n} keypoints")
    return tuple(_parse_point(p, where) for p in raw)


def _group_confident(points: Iterable[Keypoint], floor: float) -> bool:
    return all(p.confidence >= floor for p in points)


def parse_frame_record(
    data: dict, fps: float, confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR
) -> FrameRecord:
    """Build a FrameRecord from one decoded keypoints.jsonl object.

    Groups below the confidence floor come back absent.  Raises ValueError
    on structural problems; bounds are checked separately.
    """
    if "frame_index" not in data:
        raise ValueError("missing frame_index")
    idx = int(data["frame_index"])
    if idx < 0:
        raise ValueError(f"frame_index must be >= 0, got {idx}")

    left = right = dog = marker = None

    if data.get("left_arm") is not None:
        pts = _parse_points(data["left_arm"], 3, "left_arm")
        if _group_confident(pts, confidence_floor):
            left = ArmKeypoints(side="Left", points=pts)
    if data.get("right_arm") is not None:
        pts = _parse_points(data["right_arm"], 3, "right_arm")
        if _group_confident(pts, confidence_floor):
            right = ArmKeypoints(side="Right", points=pts)
    if data.get("dog") is not None:
        d = data["dog"]
        if not isinstance(d, dict):
            raise ValueError("dog: expected object")
        ears = _parse_points(d.get("ears"), 2, "dog.ears")
        neck = _parse_point(d.get("neck"), "dog.neck")
        scapula = _parse_point(d.get("scapula"), "dog.scapula")
        forelimbs = _parse_points(d.get("forelimbs"), 2, "dog.forelimbs")
        waist = _parse_point(d.get("waist"), "dog.waist")
        candidate = DogKeypoints(ears=ears, neck=neck, scapula=scapula, forelimbs=forelimbs, waist=waist)
        if _group_confident(candidate.all_points(), confidence_floor):
            dog = candidate
    if data.get("marker") is not None:
        pts = _parse_points(data["marker"], 4, "marker")
        if _group_confident(pts, confidence_floor):
            marker = MarkerFrame(corners=pts)

    return FrameRecord(
        frame_index=idx,
        timestamp_s=idx / fps,
        left_arm=left,
        right_arm=right,
        dog=dog,
        marker=marker,
    )


def frame_record_to_json_dict(record: FrameRecord) -> dict:
    out: dict[str, Any] = {"frame_index": record.frame_index}
    if record.left_arm is not None:
        out["left_arm"] = [p.as_list() for p in record.left_arm.points]
    if record.right_arm is not None:
        out["right_arm"] = [p.as_list() for p in record.right_arm.points]
    if record.dog is not None:
        d = record.dog
        out["dog"] = {
            "ears": [p.as_list() for p in d.ears],
            "neck": d.neck.as_list(),
            "scapula": d.scapula.as_list(),
            "forelimbs": [p.as_list() for p in d.forelimbs],
            "waist": d.waist.as_list(),
        }
    if record.marker is not None:
        out["marker"] = [p.as_list() for p in record.marker.corners]
    return out


# -- validation --------------------------------------------------------------


def _segments_cross(a, b, c, d) -> bool:
    """True when segment ab properly intersects segment cd."""

    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def validate_frame(record: FrameRecord, manifest: SessionManifest) -> list[str]:
    """Return every invariant violation for a frame, with field paths.

    Violations are data, not failures: an empty list means the record is
    valid.
    """
    violations: list[str] = []

    def check_point(p: Keypoint, path: str):
        if not 0.0 <= p.x <= manifest.frame_width:
            violations.append(f"{path}.x={p.x} outside [0, {manifest.frame_width}]")
        if not 0.0 <= p.y <= manifest.frame_height:
            violations.append(f"{path}.y={p.y} outside [0, {manifest.frame_height}]")
        if not 0.0 <= p.confidence <= 1.0:
            violations.append(f"{path}.confidence={p.confidence} outside [0, 1]")

    if record.frame_index < 0:
        violations.append(f"frame_index={record.frame_index} negative")
    expected_ts = record.frame_index / manifest.fps
    if abs(record.timestamp_s - expected_ts) > 1e-9:
        violations.append(
            f"timestamp_s={record.timestamp_s} != frame_index/fps ({expected_ts})"
        )

    for arm, name in ((record.left_arm, "left_arm"), (record.right_arm, "right_arm")):
        if arm is not None:
            for i, p in enumerate(arm.points):
                check_point(p, f"{name}[{i}]")
    if record.dog is not None:
        d = record.dog
        for i, p in enumerate(d.ears):
            check_point(p, f"dog.ears[{i}]")
        check_point(d.neck, "dog.neck")
        check_point(d.scapula, "dog.scapula")
        for i, p in enumerate(d.forelimbs):
            check_point(p, f"dog.forelimbs[{i}]")
        check_point(d.waist, "dog.waist")
    if record.marker is not None:
        corners = record.marker.corners
        for i, p in enumerate(corners):
            check_point(p, f"marker[{i}]")
        xy = [(p.x, p.y) for p in corners]
        for i in range(4):
            for j in range(i + 1, 4):
                if abs(xy[i][0] - xy[j][0]) < 1e-9 and abs(xy[i][1] - xy[j][1]) < 1e-9:
                    violations.append(f"marker corners {i} and {j} coincident")
        # opposite edges of a simple quadrilateral never cross
        if _segments_cross(xy[0], xy[1], xy[2], xy[3]) or _segments_cross(
            xy[1], xy[2], xy[3], xy[0]
        ):
            violations.append("marker quadrilateral self-intersecting")

    return violations


# -- loading -----------------------------------------------------------------


def load_manifest(path: str | Path) -> SessionManifest:
    directory = Path(path)
    manifest_path = directory / MANIFEST_FILE
    if not manifest_path.is_file():
        raise MissingManifest(f"no {MANIFEST_FILE} in {directory}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MissingManifest(f"unreadable manifest in {directory}: {exc}") from exc
    return SessionManifest.from_json_dict(data)


def iter_keypoint_records(
    path: str | Path, manifest: SessionManifest, confidence_floor: float
) -> Iterable[tuple[int, FrameRecord]]:
    """Yield (line_number, record) pairs from a keypoints.jsonl file.

    Raises MalformedRecord with the offending 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                record = parse_frame_record(data, manifest.fps, confidence_floor)
            except (ValueError, TypeError, KeyError) as exc:
                raise MalformedRecord(line_number, str(exc)) from exc
            yield line_number, record


def load_session(
    path: str | Path, confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR
) -> Session:
    """Load and validate a session directory.

    Frames come back sorted by frame_index; absent keypoint groups stay
    absent.

    Raises:
        MissingManifest: no readable manifest.
        MalformedRecord: undecodable or structurally invalid line.
        NonMonotonicFrameIndex: frame indices not strictly increasing.
        DimensionMismatch: keypoint coordinates outside the frame.
    """
    directory = Path(path)
    manifest = load_manifest(directory)
    keypoints_path = directory / KEYPOINTS_FILE
    if not keypoints_path.is_file():
        raise MissingManifest(f"no {KEYPOINTS_FILE} in {directory}")

    frames: list[FrameRecord] = []
    last_index = -1
    for line_number, record in iter_keypoint_records(keypoints_path, manifest, confidence_floor):
        if record.frame_index <= last_index:
            raise NonMonotonicFrameIndex(
                f"line {line_number}: frame_index {record.frame_index} after {last_index}"
            )
        last_index = record.frame_index
        if record.frame_index >= manifest.frame_count:
            raise MalformedRecord(
                line_number,
                f"frame_index {record.frame_index} >= frame_count {manifest.frame_count}",
            )
        for violation in validate_frame(record, manifest):
            if "outside [0," in violation and ".confidence" not in violation:
                raise DimensionMismatch(f"line {line_number}: {violation}")
            raise MalformedRecord(line_number, violation)
        frames.append(record)

    annotations = []
    ann_path = directory / ANNOTATIONS_FILE
    if ann_path.is_file():
        annotations = load_jsonl(ann_path, Annotation)
        if (
            manifest.ground_truth_command_count is not None
            and manifest.ground_truth_command_count != len(annotations)
        ):
            raise MalformedRecord(
                0,
                f"ground_truth_command_count {manifest.ground_truth_command_count} "
                f"!= {len(annotations)} annotations",
            )

    return Session(manifest=manifest, frames=frames, annotations=annotations, path=directory)


def collect_violations(
    path: str | Path, confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR
) -> list[str]:
    """Lenient validation pass over a session directory.

    Unlike load_session this keeps going after problems, reporting one
    entry per violation with the line number.  An unreadable directory is
    an I/O failure, not a violation, and raises MissingManifest.
    """
    directory = Path(path)
    problems: list[str] = []
    manifest = load_manifest(directory)

    keypoints_path = directory / KEYPOINTS_FILE
    if not keypoints_path.is_file():
        raise MissingManifest(f"no {KEYPOINTS_FILE} in {directory}")

    last_index = -1
    with open(keypoints_path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                record = parse_frame_record(data, manifest.fps, confidence_floor)
            except (ValueError, TypeError, KeyError) as exc:
                problems.append(f"line {line_number}: malformed record: {exc}")
                continue
            if record.frame_index <= last_index:
                problems.append(
                    f"line {line_number}: frame_index {record.frame_index} "
                    f"not after {last_index}"
                )
            last_index = max(last_index, record.frame_index)
            for violation in validate_frame(record, manifest):
                problems.append(f"line {line_number}: {violation}")
    return problems


# -- persistence ---------------------------------------------------------


def save_jsonl(items: Sequence[Any], path: str | Path) -> Path:
    """Write objects with ``to_json_dict`` as one JSON object per line."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for item in items:
                fh.write(json.dumps(item.to_json_dict(), sort_keys=False))
                fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def load_jsonl(path: str | Path, cls) -> list:
    path = Path(path)
    items = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    items.append(cls.from_json_dict(json.loads(line)))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return items


def save_json(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    data = obj.to_json_dict() if hasattr(obj, "to_json_dict") else obj
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def load_json(path: str | Path, cls=None) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return cls.from_json_dict(data) if cls is not None else data


def save_derived(session_id: str, artifact: Any, path: str | Path) -> Path:
    """Persist a derived artifact (epoch list, report, haptic track, scores).

    Sequences go to JSON-lines, single objects to JSON; both round-trip
    bit-exact through the matching loader.
    """
    log.debug("saving derived artifact for %s to %s", session_id, path)
    if isinstance(artifact, (list, tuple)):
        return save_jsonl(artifact, path)
    return save_json(artifact, path)


def write_session(session: Session, directory: str | Path) -> Path:
    """Write a session as a standard session directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    try:
        save_json(session.manifest.to_json_dict(), directory / MANIFEST_FILE)
        with open(directory / KEYPOINTS_FILE, "w", encoding="utf-8") as fh:
            for record in session.frames:
                fh.write(json.dumps(frame_record_to_json_dict(record)))
                fh.write("\n")
        if session.annotations:
            save_jsonl(session.annotations, directory / ANNOTATIONS_FILE)
    except OSError as exc:
        raise IoFailure(f"cannot write session to {directory}: {exc}") from exc
    return directory
