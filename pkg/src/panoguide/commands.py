"""Right-hand command segmentation and classification, dog-status bands,
and head-turn trigger detection.

Segmentation runs on the smoothed yaw series but every reported angle
(peak yaw/pitch) is read from the raw series at the peak frame, so peak
values survive smoothing untouched.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SegmentationConfig, TriggerConfig
from .errors import AllAbsent, DegenerateClusters, EmptySeries, TooFewSamples
from .kinematics import AngleSeries, PoseAngles


class CommandCategory(enum.Enum):
    ATTENTION_OR_RIGHT_TURN = "AttentionOrRightTurn"
    MOVEMENT_CONTROL = "MovementControl"
    LEFT_FRONT_DIRECTIONAL = "LeftFrontDirectional"
    UNCLASSIFIED = "Unclassified"


class DogStatusCategory(enum.Enum):
    WAITING_UPRIGHT = "WaitingUpright"
    WAITING_TILTED = "WaitingTilted"
    WALKING_ADJUST = "WalkingAdjust"


# yaw bands per command purpose; half-open on the low side, the top band
# closes at 150 so the boundary values assign deterministically
_CATEGORY_BANDS = {
    CommandCategory.ATTENTION_OR_RIGHT_TURN: (90.0, 110.0),
    CommandCategory.MOVEMENT_CONTROL: (110.0, 130.0),
    CommandCategory.LEFT_FRONT_DIRECTIONAL: (130.0, 150.0),
}


def classify_command(peak_yaw_deg: float) -> CommandCategory:
    """Command category from the yaw angle at maximum extension."""
    if 90.0 <= peak_yaw_deg < 110.0:
        return CommandCategory.ATTENTION_OR_RIGHT_TURN
    if 110.0 <= peak_yaw_deg < 130.0:
        return CommandCategory.MOVEMENT_CONTROL
    if 130.0 <= peak_yaw_deg <= 150.0:
        return CommandCategory.LEFT_FRONT_DIRECTIONAL
    return CommandCategory.UNCLASSIFIED


def category_band(category: CommandCategory) -> tuple[float, float] | None:
    """Plausible yaw range for a category, None for Unclassified."""
    return _CATEGORY_BANDS.get(category)


@dataclass(frozen=True)
class StatusThresholds:
    """Two boundaries splitting head angles into three posture bands."""

    low_high_split: float
    mid_high_split: float

    def __post_init__(self):
        if not 0.0 < self.low_high_split < self.mid_high_split < 180.0:
            raise ValueError(
                f"need 0 < {self.low_high_split} < {self.mid_high_split} < 180"
            )


def classify_dog_status(head_angle_deg: float, thresholds: StatusThresholds) -> DogStatusCategory:
    if head_angle_deg < thresholds.low_high_split:
        return DogStatusCategory.WAITING_UPRIGHT
    if head_angle_deg < thresholds.mid_high_split:
        return DogStatusCategory.WAITING_TILTED
    return DogStatusCategory.WALKING_ADJUST


def status_band(
    status: DogStatusCategory, thresholds: StatusThresholds
) -> tuple[float, float]:
    """Head-angle range covered by a status category."""
    if status is DogStatusCategory.WAITING_UPRIGHT:
        return (0.0, thresholds.low_high_split)
    if status is DogStatusCategory.WAITING_TILTED:
        return (thresholds.low_high_split, thresholds.mid_high_split)
    return (thresholds.mid_high_split, 180.0)


@dataclass
class CommandEpoch:
    """One detected right-hand command gesture."""

    start_frame: int
    peak_frame: int
    end_frame: int
    peak_angles: PoseAngles | None = None
    peak_velocity_deg_s: float | None = None
    category: CommandCategory | None = None
    dog_status_at_peak: DogStatusCategory | None = None

    def __post_init__(self):
        if not self.start_frame <= self.peak_frame <= self.end_frame:
            raise ValueError(
                f"need start <= peak <= end, got "
                f"({self.start_frame}, {self.peak_frame}, {self.end_frame})"
            )

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1

    def to_json_dict(self) -> dict:
        return {
            "start_frame": self.start_frame,
            "peak_frame": self.peak_frame,
            "end_frame": self.end_frame,
            "peak_yaw_deg": None if self.peak_angles is None else self.peak_angles.yaw_deg,
            "peak_pitch_deg": None if self.peak_angles is None else self.peak_angles.pitch_deg,
            "peak_velocity_deg_s": self.peak_velocity_deg_s,
            "category": None if self.category is None else self.category.value,
            "dog_status": None if self.dog_status_at_peak is None else self.dog_status_at_peak.value,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CommandEpoch":
        angles = None
        if data.get("peak_yaw_deg") is not None:
            angles = PoseAngles(yaw_deg=data["peak_yaw_deg"], pitch_deg=data["peak_pitch_deg"])
        return cls(
            start_frame=int(data["start_frame"]),
            peak_frame=int(data["peak_frame"]),
            end_frame=int(data["end_frame"]),
            peak_angles=angles,
            peak_velocity_deg_s=data.get("peak_velocity_deg_s"),
            category=CommandCategory(data["category"]) if data.get("category") else None,
            dog_status_at_peak=(
                DogStatusCategory(data["dog_status"]) if data.get("dog_status") else None
            ),
        )


@dataclass(frozen=True)
class TriggerEvent:
    """Sustained drop of the dog head angle: the dog faces the trainer."""

    frame: int
    head_angle_deg: float
    sustained_frames: int

    def to_json_dict(self) -> dict:
        return {
            "frame": self.frame,
            "head_angle_deg": self.head_angle_deg,
            "sustained_frames": self.sustained_frames,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TriggerEvent":
        return cls(
            frame=int(data["frame"]),
            head_angle_deg=float(data["head_angle_deg"]),
            sustained_frames=int(data["sustained_frames"]),
        )


# -- segmentation ----------------------------------------------------------


class EpochSegmenter:
    """Incremental command segmentation state machine.

    Feed frames in order; closed (start, peak, end) spans come back as
    soon as the gesture retracts, which is what both the batch path and
    the live practice path run on.  Mechanics:

    * an epoch opens when the value rises above ``enter_threshold``
      (rest level + hysteresis);
    * the peak is the running argmax, earliest frame on ties;
    * the epoch ends on the last frame before the value drops below
      ``peak - retract_drop`` or falls back under the enter threshold;
    * after a retraction, a new rise of at least the hysteresis above the
      local minimum opens the next epoch without requiring a return to
      rest;
    * spans shorter than ``min_frames`` are discarded.
    """

    _REST, _ACTIVE, _TAIL = range(3)

    def __init__(self, enter_threshold: float, enter_hysteresis: float,
                 retract_drop: float, min_frames: int):
        self.enter_threshold = enter_threshold
        self.enter_hysteresis = enter_hysteresis
        self.retract_drop = retract_drop
        self.min_frames = min_frames
        self._state = self._REST
        self._start = self._peak = -1
        self._peak_val = -math.inf
        self._tail_min = math.inf
        self._last_frame = -1

    def _open(self, frame: int, value: float) -> None:
        self._state = self._ACTIVE
        self._start = self._peak = frame
        self._peak_val = value

    def _close(self, end_frame: int) -> tuple[int, int, int] | None:
        span = (self._start, self._peak, end_frame)
        self._state = self._REST
        if end_frame - self._start + 1 >= self.min_frames:
            return span
        return None

    def feed(self, frame: int, value: float) -> list[tuple[int, int, int]]:
        """Advance one frame; NaN counts as rest. Returns spans closed now."""
        closed: list[tuple[int, int, int]] = []
        absent = value is None or (isinstance(value, float) and math.isnan(value))

        if self._state == self._ACTIVE:
            if absent or value < self.enter_threshold:
                span = self._close(self._last_frame)
                if span:
                    closed.append(span)
            elif value < self._peak_val - self.retract_drop:
                span = self._close(self._last_frame)
                if span:
                    closed.append(span)
                self._state = self._TAIL
                self._tail_min = value
            elif value > self._peak_val:
                self._peak, self._peak_val = frame, value
        elif self._state == self._TAIL:
            if absent or value < self.enter_threshold:
                self._state = self._REST
            elif value >= self._tail_min + self.enter_hysteresis:
                self._open(frame, value)
            else:
                self._tail_min = min(self._tail_min, value)
        else:  # REST
            if not absent and value >= self.enter_threshold:
                self._open(frame, value)

        self._last_frame = frame
        return closed

    def finish(self) -> list[tuple[int, int, int]]:
        """Close any epoch still open at the end of the stream."""
        if self._state == self._ACTIVE:
            span = self._close(self._last_frame)
            return [span] if span else []
        return []


def estimate_rest_level(values: np.ndarray, config: SegmentationConfig) -> float:
    if config.rest_band_deg is not None:
        return config.rest_band_deg
    present = values[~np.isnan(values)]
    if len(present) == 0:
        raise EmptySeries("no present values to estimate the rest level from")
    return float(np.percentile(present, config.rest_percentile))


def segment_commands(
    yaw: AngleSeries, config: SegmentationConfig | None = None
) -> list[CommandEpoch]:
    """Detect command epochs on a smoothed right-arm yaw series.

    Returned epochs carry only the frame span; peak values, category and
    dog status get filled in by the session analysis step.

    Raises:
        EmptySeries: empty or all-absent input.
    """
    cfg = config or SegmentationConfig()
    if len(yaw) == 0:
        raise EmptySeries("cannot segment an empty series")
    rest = estimate_rest_level(yaw.values, cfg)
    segmenter = EpochSegmenter(
        enter_threshold=rest + cfg.enter_hysteresis_deg,
        enter_hysteresis=cfg.enter_hysteresis_deg,
        retract_drop=cfg.retract_drop_deg,
        min_frames=cfg.min_epoch_frames,
    )
    spans: list[tuple[int, int, int]] = []
    for i, value in enumerate(yaw.values):
        spans.extend(segmenter.feed(i, float(value)))
    spans.extend(segmenter.finish())
    return [CommandEpoch(start_frame=s, peak_frame=p, end_frame=e) for s, p, e in spans]


def max_extension_frame(span: tuple[int, int], yaw: AngleSeries) -> int:
    """Argmax of yaw over [start, end], earliest frame on ties.

    Raises:
        AllAbsent: if no frame in the span has a value.
    """
    start, end = span
    best_frame = -1
    best_val = -math.inf
    for i in range(start, end + 1):
        v = yaw.values[i]
        if not math.isnan(v) and v > best_val:
            best_frame, best_val = i, float(v)
    if best_frame < 0:
        raise AllAbsent(f"no present yaw values in span [{start}, {end}]")
    return best_frame


# -- dog status clustering ---------------------------------------------------


def fit_status_thresholds(
    head_angles_deg, tol: float = 1e-6, max_iter: int = 500
) -> StatusThresholds:
    """Split head angles at command frames into three posture bands.

    Deterministic 1-D 3-means: centroids start at the 10th/50th/90th
    percentiles and Lloyd iterations run to convergence; the two
    thresholds are the midpoints between adjacent sorted centroids.

    Raises:
        TooFewSamples: fewer than 3 samples.
        DegenerateClusters: centroids collapse (e.g. all-equal input).
    """
    samples = np.asarray(list(head_angles_deg), dtype=float)
    if len(samples) < 3:
        raise TooFewSamples(f"need >= 3 samples, got {len(samples)}")
    centroids = np.percentile(samples, [10.0, 50.0, 90.0])
    for _ in range(max_iter):
        # nearest centroid, lower index on ties
        dists = np.abs(samples[:, None] - centroids[None, :])
        assign = np.argmin(dists, axis=1)
        new_centroids = centroids.copy()
        for k in range(3):
            members = samples[assign == k]
            if len(members) > 0:
                new_centroids[k] = members.mean()
        shift = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if shift < tol:
            break
    centroids = np.sort(centroids)
    if centroids[1] - centroids[0] < 1e-9 or centroids[2] - centroids[1] < 1e-9:
        raise DegenerateClusters(f"centroids collapsed: {centroids.tolist()}")
    low = float((centroids[0] + centroids[1]) / 2.0)
    mid = float((centroids[1] + centroids[2]) / 2.0)
    return StatusThresholds(low_high_split=low, mid_high_split=mid)


# -- head-turn triggers --------------------------------------------------


@dataclass
class _DipState:
    run_start: int = -1
    run_length: int = 0
    fired_at: int = -1
    fired_angle: float = float("nan")


def detect_head_turn_triggers(
    head: AngleSeries, config: TriggerConfig | None = None
) -> list[TriggerEvent]:
    """Events where the dog head angle stays below the turn threshold.

    A low angle means the head is oriented toward the trainer.  One event
    fires per sustained crossing, at the frame where the sustain count is
    reached; re-arming requires the angle to climb back above threshold +
    hysteresis first.
    """
    cfg = config or TriggerConfig()
    events: list[TriggerEvent] = []
    armed = True
    dip = _DipState()
    pending: _DipState | None = None

    def flush():
        nonlocal pending
        if pending is not None and pending.fired_at >= 0:
            events.append(
                TriggerEvent(
                    frame=pending.fired_at,
                    head_angle_deg=pending.fired_angle,
                    sustained_frames=pending.run_length,
                )
            )
        pending = None

    for i, value in enumerate(head.values):
        if math.isnan(value):
            flush()
            dip = _DipState()
            continue
        if value < cfg.turn_threshold_deg:
            if dip.run_length == 0:
                dip = _DipState(run_start=i)
            dip.run_length += 1
            if armed and dip.run_length == cfg.sustain_frames:
                dip.fired_at = i
                dip.fired_angle = float(value)
                pending = dip
                armed = False
        else:
            flush()
            dip = _DipState()
            if value >= cfg.turn_threshold_deg + cfg.rearm_hysteresis_deg:
                armed = True
    flush()
    return events
