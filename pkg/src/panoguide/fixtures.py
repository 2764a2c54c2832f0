"""Synthetic session generator with planted ground truth.

Keypoints are synthesized by inverse kinematics: every planted angle
trajectory is realized exactly against the frame's own marker axes, so at
zero noise the analysis pipeline must recover the planted peaks to float
precision.  Command ramps are symmetric triangles around the peak frame,
which keeps the smoothed argmax on the planted apex.

Pitch follows from yaw here: skeleton directions are laid out on the
positive side of the horizontal axis, so a planted command peak realizes
``pitch = |90 - yaw|`` and the achieved value is what lands in the truth
annotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .commands import classify_command
from .errors import OverlappingEpochs
from .geometry import ViewParams
from .session import (
    Annotation,
    ArmKeypoints,
    DogKeypoints,
    FrameRecord,
    Keypoint,
    MarkerFrame,
    Session,
    SessionManifest,
    save_json,
    write_session,
)


@dataclass(frozen=True)
class PlantedEpoch:
    start: int
    peak: int
    end: int
    peak_yaw: float
    peak_pitch: float


@dataclass
class FixtureSpec:
    seed: int
    frame_count: int
    fps: float = 30.0
    planted_epochs: list[PlantedEpoch] = field(default_factory=list)
    planted_triggers: list[int] = field(default_factory=list)  # dip start frames
    noise_sigma_deg: float = 0.0
    marker_motion: str = "static"  # "static" | "slow-drift"
    dataset_name: str = "synthetic"
    session_id: str = ""
    frame_width: int = 640
    frame_height: int = 640
    rest_yaw_deg: float = 60.0
    head_baseline_deg: float = 80.0
    # all levels sit above the default 60 deg turn threshold so status
    # plateaus never fire spurious head-turn triggers
    status_levels_deg: tuple[float, float, float] = (65.0, 90.0, 115.0)
    trigger_dip_deg: float = 35.0
    trigger_dip_frames: int = 15
    back_angle_deg: float = 100.0
    left_walk_center_deg: float = 85.0
    left_walk_amplitude_deg: float = 8.0
    left_walk_period_s: float = 1.2
    left_excursions: list[tuple[int, int, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.session_id:
            self.session_id = f"{self.dataset_name}-{self.seed}"

    def validate(self) -> None:
        ordered = sorted(self.planted_epochs, key=lambda e: e.start)
        last_end = -1
        for e in ordered:
            if not 0 <= e.start <= e.peak <= e.end < self.frame_count:
                raise OverlappingEpochs(
                    f"epoch ({e.start}, {e.peak}, {e.end}) outside session of "
                    f"{self.frame_count} frames"
                )
            if e.start <= last_end:
                raise OverlappingEpochs(f"epoch starting at {e.start} overlaps previous span")
            last_end = e.end

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "frame_count": self.frame_count,
            "fps": self.fps,
            "planted_epochs": [
                [e.start, e.peak, e.end, e.peak_yaw, e.peak_pitch] for e in self.planted_epochs
            ],
            "planted_triggers": list(self.planted_triggers),
            "noise_sigma_deg": self.noise_sigma_deg,
            "marker_motion": self.marker_motion,
            "dataset_name": self.dataset_name,
            "session_id": self.session_id,
            "left_excursions": [list(e) for e in self.left_excursions],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FixtureSpec":
        return cls(
            seed=int(data["seed"]),
            frame_count=int(data["frame_count"]),
            fps=float(data.get("fps", 30.0)),
            planted_epochs=[
                PlantedEpoch(int(s), int(p), int(e), float(y), float(pi))
                for s, p, e, y, pi in data.get("planted_epochs", [])
            ],
            planted_triggers=[int(t) for t in data.get("planted_triggers", [])],
            noise_sigma_deg=float(data.get("noise_sigma_deg", 0.0)),
            marker_motion=data.get("marker_motion", "static"),
            dataset_name=data.get("dataset_name", "synthetic"),
            session_id=data.get("session_id", ""),
            left_excursions=[
                (int(s), int(e), float(m)) for s, e, m in data.get("left_excursions", [])
            ],
        )


@dataclass
class FixtureTruth:
    """Exact planted values as realized by the generator."""

    annotations: list[Annotation]
    trigger_dip_starts: list[int]
    left_excursions: list[tuple[int, int, float]]
    rest_yaw_deg: float

    def to_json_dict(self) -> dict:
        return {
            "annotations": [a.to_json_dict() for a in self.annotations],
            "trigger_dip_starts": list(self.trigger_dip_starts),
            "left_excursions": [list(e) for e in self.left_excursions],
            "rest_yaw_deg": self.rest_yaw_deg,
        }


# static skeleton layout (pixels, image y down); chosen so every planted
# trajectory stays inside the 640x640 frame
_MARKER_CENTER = (560.0, 420.0)
_MARKER_HALF = 35.0
_RIGHT_ELBOW = (300.0, 330.0)
_RIGHT_FINGER_LEN = 130.0
_RIGHT_WRIST_LEN = 72.0
_DOG_NECK = (430.0, 300.0)
_DOG_HEAD_LEN = 55.0
_DOG_FORE_MID = (450.0, 380.0)
_DOG_BACK_LEN = 90.0
_LEFT_ELBOW = (200.0, 330.0)
_LEFT_WRIST_LEN = 75.0


def _kp(x: float, y: float) -> Keypoint:
    return Keypoint(float(x), float(y), 1.0)


def _marker_at(spec: FixtureSpec, frame: int) -> tuple[MarkerFrame, np.ndarray, np.ndarray]:
    """Marker corners plus the exact horizontal/gravity unit axes they imply."""
    cx, cy = _MARKER_CENTER
    angle = 0.0
    if spec.marker_motion == "slow-drift":
        cx += 8.0 * math.sin(2.0 * math.pi * frame / 600.0)
        cy += 6.0 * math.sin(2.0 * math.pi * frame / 840.0)
        angle = math.radians(3.0) * math.sin(2.0 * math.pi * frame / 900.0)
    h = np.array([math.cos(angle), math.sin(angle)])
    g = np.array([-math.sin(angle), math.cos(angle)])
    half = _MARKER_HALF
    corners = (
        _kp(*(np.array([cx, cy]) - half * h - half * g)),  # top-left
        _kp(*(np.array([cx, cy]) + half * h - half * g)),  # top-right
        _kp(*(np.array([cx, cy]) + half * h + half * g)),  # bottom-right
        _kp(*(np.array([cx, cy]) - half * h + half * g)),  # bottom-left
    )
    return MarkerFrame(corners=corners), h, g


def _direction(angle_deg: float, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    a = math.radians(angle_deg)
    return math.cos(a) * h + math.sin(a) * g


def _right_yaw_trajectory(spec: FixtureSpec) -> np.ndarray:
    values = np.full(spec.frame_count, spec.rest_yaw_deg)
    for e in spec.planted_epochs:
        for f in range(e.start, e.peak + 1):
            t = 1.0 if e.peak == e.start else (f - e.start) / (e.peak - e.start)
            values[f] = spec.rest_yaw_deg + t * (e.peak_yaw - spec.rest_yaw_deg)
        for f in range(e.peak + 1, e.end + 1):
            t = (f - e.peak) / (e.end - e.peak)
            values[f] = e.peak_yaw + t * (spec.rest_yaw_deg - e.peak_yaw)
    return values


def _head_trajectory(spec: FixtureSpec) -> np.ndarray:
    values = np.full(spec.frame_count, spec.head_baseline_deg)
    levels = spec.status_levels_deg
    for k, e in enumerate(spec.planted_epochs):
        level = levels[k % len(levels)]
        lo = max(0, e.peak - 8)
        hi = min(spec.frame_count - 1, e.peak + 8)
        values[lo : hi + 1] = level
    for start in spec.planted_triggers:
        lo = max(0, start)
        hi = min(spec.frame_count - 1, start + spec.trigger_dip_frames - 1)
        values[lo : hi + 1] = spec.trigger_dip_deg
    return values


def _left_yaw_trajectory(spec: FixtureSpec) -> np.ndarray:
    t = np.arange(spec.frame_count)
    period = spec.left_walk_period_s * spec.fps
    values = spec.left_walk_center_deg + spec.left_walk_amplitude_deg * np.sin(
        2.0 * math.pi * t / period
    )
    for start, end, magnitude in spec.left_excursions:
        values[start : end + 1] += magnitude
    return values


def generate(spec: FixtureSpec) -> tuple[Session, FixtureTruth]:
    """Build a deterministic in-memory session for a fixture spec.

    Raises:
        OverlappingEpochs: planted spans overlap or fall outside the session.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    noise = lambda: rng.normal(0.0, spec.noise_sigma_deg) if spec.noise_sigma_deg > 0 else 0.0

    right_yaw = _right_yaw_trajectory(spec)
    head_yaw = _head_trajectory(spec)
    left_yaw = _left_yaw_trajectory(spec)

    frames: list[FrameRecord] = []
    for f in range(spec.frame_count):
        marker, h, g = _marker_at(spec, f)

        d_right = _direction(right_yaw[f] + noise(), h, g)
        elbow = np.array(_RIGHT_ELBOW)
        right = ArmKeypoints(
            side="Right",
            points=(
                _kp(*(elbow + _RIGHT_FINGER_LEN * d_right)),
                _kp(*(elbow + _RIGHT_WRIST_LEN * d_right)),
                _kp(*elbow),
            ),
        )

        d_head = _direction(head_yaw[f] + noise(), h, g)
        neck = np.array(_DOG_NECK)
        ear_mid = neck + _DOG_HEAD_LEN * d_head
        perp_h = np.array([-d_head[1], d_head[0]])
        d_back = _direction(spec.back_angle_deg + noise(), h, g)
        fore_mid = np.array(_DOG_FORE_MID)
        waist = fore_mid + _DOG_BACK_LEN * d_back
        perp_b = np.array([-d_back[1], d_back[0]])
        dog = DogKeypoints(
            ears=(_kp(*(ear_mid - 8.0 * perp_h)), _kp(*(ear_mid + 8.0 * perp_h))),
            neck=_kp(*neck),
            scapula=_kp(*((neck + waist) / 2.0)),
            forelimbs=(_kp(*(fore_mid - 12.0 * perp_b)), _kp(*(fore_mid + 12.0 * perp_b))),
            waist=_kp(*waist),
        )

        d_left = _direction(left_yaw[f] + noise(), h, g)
        left_elbow = np.array(_LEFT_ELBOW)
        left = ArmKeypoints(
            side="Left",
            points=(
                _kp(*(left_elbow + _LEFT_WRIST_LEN * d_left)),
                _kp(*left_elbow),
                _kp(left_elbow[0], left_elbow[1] - 70.0),
            ),
        )

        frames.append(
            FrameRecord(
                frame_index=f,
                timestamp_s=f / spec.fps,
                left_arm=left,
                right_arm=right,
                dog=dog,
                marker=marker,
            )
        )

    annotations = [
        Annotation(
            start_frame=e.start,
            peak_frame=e.peak,
            end_frame=e.end,
            category=classify_command(e.peak_yaw).value,
        )
        for e in spec.planted_epochs
    ]
    manifest = SessionManifest(
        session_id=spec.session_id,
        dataset_name=spec.dataset_name,
        fps=spec.fps,
        frame_count=spec.frame_count,
        frame_width=spec.frame_width,
        frame_height=spec.frame_height,
        view=ViewParams(
            theta_deg=0.0,
            phi_deg=-20.0,
            fov_deg=100.0,
            out_width=spec.frame_width,
            out_height=spec.frame_height,
            pano_width=3840,
            pano_height=1920,
        ),
        ground_truth_command_count=len(annotations),
    )
    session = Session(manifest=manifest, frames=frames, annotations=annotations)
    truth = FixtureTruth(
        annotations=annotations,
        trigger_dip_starts=list(spec.planted_triggers),
        left_excursions=list(spec.left_excursions),
        rest_yaw_deg=spec.rest_yaw_deg,
    )
    return session, truth


def write_fixture(spec: FixtureSpec, out_dir: str | Path) -> tuple[Session, FixtureTruth]:
    """Generate a fixture and write it as a standard session directory."""
    session, truth = generate(spec)
    out_dir = Path(out_dir)
    write_session(session, out_dir)
    save_json(truth.to_json_dict(), out_dir / "planted.json")
    return session, truth


def evenly_planted_spec(
    seed: int,
    epoch_count: int,
    dataset_name: str = "synthetic",
    noise_sigma_deg: float = 0.0,
    spacing: int = 60,
    ramp: int = 12,
    lead: int = 90,
    with_triggers: bool = True,
) -> FixtureSpec:
    """Spec with evenly spaced symmetric command bumps cycling through the
    yaw categories, plus head-turn dips in the inter-command gaps."""
    yaw_cycle = (95.0, 105.0, 115.0, 120.0, 125.0, 135.0, 140.0, 145.0)
    epochs = []
    triggers = []
    for k in range(epoch_count):
        start = lead + k * spacing
        peak = start + ramp
        end = peak + ramp
        yaw = yaw_cycle[k % len(yaw_cycle)]
        epochs.append(
            PlantedEpoch(start=start, peak=peak, end=end, peak_yaw=yaw, peak_pitch=abs(90.0 - yaw))
        )
        if with_triggers and k % 4 == 0:
            triggers.append(end + 8)
    frame_count = lead + epoch_count * spacing + 120
    return FixtureSpec(
        seed=seed,
        frame_count=frame_count,
        planted_epochs=epochs,
        planted_triggers=triggers,
        noise_sigma_deg=noise_sigma_deg,
        dataset_name=dataset_name,
    )


def dataset_fixture_specs(noise_sigma_deg: float = 0.0) -> list[FixtureSpec]:
    """Four shipped specs mirroring the recorded datasets' command counts
    (37, 48, 31 and 52) and environment labels."""
    mirrors = (
        ("Hybrid1-synth", 37, 101),
        ("Hybrid2-synth", 48, 102),
        ("Room1-synth", 31, 103),
        ("Room2-synth", 52, 104),
    )
    return [
        evenly_planted_spec(
            seed=seed,
            epoch_count=count,
            dataset_name=name,
            noise_sigma_deg=noise_sigma_deg,
        )
        for name, count, seed in mirrors
    ]
