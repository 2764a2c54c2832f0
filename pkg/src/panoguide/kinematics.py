"""Skeleton vectors, per-frame pose angles and derived time series.

Series are numpy arrays with NaN marking frames where the subject (or the
marker) was absent; downstream code treats NaN as "no data", never as a
value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import KinematicsConfig
from .errors import DegenerateMarker, DegenerateVector, NoMarkerEver
from .geometry import AxesFrame, angle_between, marker_axes
from .session import ArmKeypoints, DogKeypoints, Session

_NORM_EPS = 1e-12


class Subject(enum.Enum):
    DOG_HEAD = "DogHead"
    DOG_BACK = "DogBack"
    RIGHT_ARM = "RightArm"
    LEFT_FOREARM = "LeftForearm"


class Measure(enum.Enum):
    YAW = "yaw"  # vs. the marker horizontal axis
    PITCH = "pitch"  # vs. the marker gravity axis


@dataclass(frozen=True)
class PoseAngles:
    yaw_deg: float
    pitch_deg: float


@dataclass
class AngleSeries:
    """Per-frame angle in degrees; NaN where the subject was absent."""

    values: np.ndarray
    fps: float
    subject: Subject
    measure: Measure = Measure.YAW

    def __len__(self) -> int:
        return len(self.values)

    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass
class VelocitySeries:
    """Angular velocity in deg/s; NaN near gaps and absent angles."""

    values: np.ndarray
    fps: float


def _vec(p_from, p_to) -> np.ndarray:
    return np.array([p_to.x - p_from.x, p_to.y - p_from.y], dtype=float)


def _require_nondegenerate(v: np.ndarray) -> np.ndarray:
    if float(np.hypot(v[0], v[1])) < _NORM_EPS:
        raise DegenerateVector("skeleton vector has zero length")
    return v


def dog_head_vector(dog: DogKeypoints) -> np.ndarray:
    """Neck to ear-midpoint vector representing the head skeleton."""
    mid_x = (dog.ears[0].x + dog.ears[1].x) / 2.0
    mid_y = (dog.ears[0].y + dog.ears[1].y) / 2.0
    v = np.array([mid_x - dog.neck.x, mid_y - dog.neck.y])
    return _require_nondegenerate(v)


def dog_back_vector(dog: DogKeypoints) -> np.ndarray:
    """Forelimb-midpoint to waist vector representing the back skeleton."""
    mid_x = (dog.forelimbs[0].x + dog.forelimbs[1].x) / 2.0
    mid_y = (dog.forelimbs[0].y + dog.forelimbs[1].y) / 2.0
    v = np.array([dog.waist.x - mid_x, dog.waist.y - mid_y])
    return _require_nondegenerate(v)


def arm_vector(arm: ArmKeypoints, right_endpoint: str = "finger") -> np.ndarray:
    """Forearm direction vector.

    Right arm: finger - elbow by default, wrist - elbow when configured.
    Left arm: wrist - elbow.
    """
    if arm.side == "Right":
        finger, wrist, elbow = arm.points
        tip = wrist if right_endpoint == "wrist" else finger
        return _require_nondegenerate(_vec(elbow, tip))
    wrist, elbow, _shoulder = arm.points
    return _require_nondegenerate(_vec(elbow, wrist))


def pose_angles(vec, axes: AxesFrame) -> PoseAngles:
    """Yaw and pitch of a skeleton vector against the marker axes."""
    return PoseAngles(
        yaw_deg=angle_between(vec, axes.horizontal),
        pitch_deg=angle_between(vec, axes.gravity),
    )


def axes_per_frame(session: Session, lookback_frames: int = 15) -> list[AxesFrame | None]:
    """Marker axes for every frame index in [0, frame_count).

    A frame without a usable marker reuses the most recent valid axes
    within the lookback window; beyond that the entry is None.  The marker
    can be briefly occluded by the arm, which is what the lookback covers.

    Raises:
        NoMarkerEver: if no frame in the session has a valid marker.
    """
    count = session.manifest.frame_count
    axes: list[AxesFrame | None] = [None] * count
    last_axes: AxesFrame | None = None
    last_frame = -1
    any_marker = False
    for i in range(count):
        record = session.frame_at(i)
        if record is not None and record.marker is not None:
            try:
                current = marker_axes([(p.x, p.y) for p in record.marker.corners])
            except DegenerateMarker:
                current = None
            if current is not None:
                last_axes, last_frame = current, i
                any_marker = True
        if last_axes is not None and i - last_frame <= lookback_frames:
            axes[i] = last_axes
    if not any_marker:
        raise NoMarkerEver("session has no frame with a valid marker")
    return axes


def _subject_vector(record, subject: Subject, right_endpoint: str) -> np.ndarray | None:
    if subject is Subject.DOG_HEAD:
        return dog_head_vector(record.dog) if record.dog is not None else None
    if subject is Subject.DOG_BACK:
        return dog_back_vector(record.dog) if record.dog is not None else None
    if subject is Subject.RIGHT_ARM:
        if record.right_arm is None:
            return None
        return arm_vector(record.right_arm, right_endpoint)
    if subject is Subject.LEFT_FOREARM:
        if record.left_arm is None:
            return None
        return arm_vector(record.left_arm)
    raise ValueError(f"unknown subject {subject}")


def angle_series(
    session: Session,
    subject: Subject,
    measure: Measure = Measure.YAW,
    config: KinematicsConfig | None = None,
    axes: list[AxesFrame | None] | None = None,
) -> AngleSeries:
    """Per-frame pose angle for a subject over the whole session.

    Frames missing the subject's keypoints or a usable marker yield NaN.
    Precomputed ``axes`` (from :func:`axes_per_frame`) can be passed in to
    avoid recomputing them per measure.
    """
    cfg = config or KinematicsConfig()
    if axes is None:
        axes = axes_per_frame(session, cfg.marker_lookback_frames)
    count = session.manifest.frame_count
    values = np.full(count, np.nan)
    for i in range(count):
        record = session.frame_at(i)
        frame_axes = axes[i]
        if record is None or frame_axes is None:
            continue
        try:
            vec = _subject_vector(record, subject, cfg.right_arm_endpoint)
        except DegenerateVector:
            vec = None
        if vec is None:
            continue
        reference = frame_axes.horizontal if measure is Measure.YAW else frame_axes.gravity
        values[i] = angle_between(vec, reference)
    return AngleSeries(values=values, fps=session.manifest.fps, subject=subject, measure=measure)


def smooth_series(series: AngleSeries, window: int) -> AngleSeries:
    """Centered moving average over present values only.

    Window must be odd and >= 1; window 1 is the identity.  Absent frames
    stay absent, and smoothing never leaves the min/max envelope of its
    window inputs.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if window == 1:
        return AngleSeries(series.values.copy(), series.fps, series.subject, series.measure)
    half = window // 2
    src = series.values
    out = np.full_like(src, np.nan)
    for i in range(len(src)):
        if math.isnan(src[i]):
            continue
        chunk = src[max(0, i - half) : i + half + 1]
        out[i] = float(np.nanmean(chunk))
    return AngleSeries(out, series.fps, series.subject, series.measure)


def angular_velocity(series: AngleSeries) -> VelocitySeries:
    """Central-difference angular velocity in deg/s.

    v[i] = (a[i+1] - a[i-1]) * fps / 2 in the interior, one-sided at the
    series ends.  A frame is NaN unless itself and both stencil neighbours
    are present.
    """
    a = series.values
    n = len(a)
    v = np.full(n, np.nan)
    if n == 0:
        return VelocitySeries(values=v, fps=series.fps)
    ok = ~np.isnan(a)
    if n >= 2:
        if ok[0] and ok[1]:
            v[0] = (a[1] - a[0]) * series.fps
        if ok[-1] and ok[-2]:
            v[-1] = (a[-1] - a[-2]) * series.fps
    for i in range(1, n - 1):
        if ok[i - 1] and ok[i] and ok[i + 1]:
            v[i] = (a[i + 1] - a[i - 1]) * series.fps / 2.0
    return VelocitySeries(values=v, fps=series.fps)
