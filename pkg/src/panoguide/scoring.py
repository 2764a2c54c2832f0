"""Practice-vs-expert comparison: epoch matching, deviation scoring and the
incremental live pipeline behind the replay stream.

The live path reuses the expert session's marker axes and rest level as
the shared reference (the practicing user mimics the same recording), so
the incremental segmentation is frame-for-frame the same state machine the
batch path runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import SessionAnalysis
from .commands import CommandEpoch, EpochSegmenter, classify_command
from .config import PipelineConfig, ScoringConfig, SegmentationConfig
from .cues import OverlayKind, OverlaySpec
from .kinematics import (
    AngleSeries,
    Measure,
    PoseAngles,
    Subject,
    angular_velocity,
    arm_vector,
    smooth_series,
)
from .geometry import angle_between
from .errors import DegenerateVector
from .session import ArmKeypoints


@dataclass(frozen=True)
class PracticePose:
    """One live right-arm pose sample aimed at a replay frame."""

    frame_index: int
    right_arm: ArmKeypoints
    received_seq: int


@dataclass
class PracticeScore:
    epoch_id: int | None
    timing_offset_ms: float | None
    yaw_error_deg: float | None
    pitch_error_deg: float | None
    velocity_error_deg_s: float | None
    category_match: bool
    composite: float

    def to_json_dict(self) -> dict:
        return {
            "epoch_id": self.epoch_id,
            "timing_offset_ms": self.timing_offset_ms,
            "yaw_error_deg": self.yaw_error_deg,
            "pitch_error_deg": self.pitch_error_deg,
            "velocity_error_deg_s": self.velocity_error_deg_s,
            "category_match": self.category_match,
            "composite": self.composite,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PracticeScore":
        return cls(
            epoch_id=data.get("epoch_id"),
            timing_offset_ms=data.get("timing_offset_ms"),
            yaw_error_deg=data.get("yaw_error_deg"),
            pitch_error_deg=data.get("pitch_error_deg"),
            velocity_error_deg_s=data.get("velocity_error_deg_s"),
            category_match=bool(data["category_match"]),
            composite=float(data["composite"]),
        )


def match_epochs(
    expert: list[CommandEpoch],
    practice: list[CommandEpoch],
    window_frames: int = 45,
) -> list[tuple[CommandEpoch, CommandEpoch | None]]:
    """Greedy nearest-peak pairing of practice epochs to expert epochs.

    Both lists must be sorted.  Each practice epoch is used at most once;
    an expert epoch with no practice peak within the window pairs with
    None (a miss).
    """
    used: set[int] = set()
    pairs: list[tuple[CommandEpoch, CommandEpoch | None]] = []
    for exp in expert:
        best_idx = -1
        best_dist = window_frames + 1
        for i, prac in enumerate(practice):
            if i in used:
                continue
            dist = abs(prac.peak_frame - exp.peak_frame)
            if dist <= window_frames and dist < best_dist:
                best_idx, best_dist = i, dist
        if best_idx >= 0:
            used.add(best_idx)
            pairs.append((exp, practice[best_idx]))
        else:
            pairs.append((exp, None))
    return pairs


def score_practice(
    expert: CommandEpoch,
    practice: CommandEpoch | None,
    epoch_id: int,
    fps: float,
    v_max: float,
    config: ScoringConfig | None = None,
) -> PracticeScore:
    """Deviation score for one matched (or missed) expert epoch.

    The composite is ``clamp(1 - sum(w_i * normalized_error_i), 0, 1)``
    with yaw/pitch normalized by 30 deg, timing by 1000 ms and velocity by
    the session's calibrated v_max.  Misses score 0.
    """
    cfg = config or ScoringConfig()
    if practice is None:
        return PracticeScore(
            epoch_id=epoch_id,
            timing_offset_ms=None,
            yaw_error_deg=None,
            pitch_error_deg=None,
            velocity_error_deg_s=None,
            category_match=False,
            composite=0.0,
        )
    timing_ms = (practice.peak_frame - expert.peak_frame) / fps * 1000.0
    e_angles = expert.peak_angles or PoseAngles(0.0, 0.0)
    p_angles = practice.peak_angles or PoseAngles(0.0, 0.0)
    yaw_err = abs(p_angles.yaw_deg - e_angles.yaw_deg)
    pitch_err = abs(p_angles.pitch_deg - e_angles.pitch_deg)
    if expert.peak_velocity_deg_s is None or practice.peak_velocity_deg_s is None:
        vel_err = 0.0
    else:
        vel_err = abs(practice.peak_velocity_deg_s - expert.peak_velocity_deg_s)
    penalty = (
        cfg.weight_yaw * yaw_err / cfg.yaw_norm_deg
        + cfg.weight_pitch * pitch_err / cfg.pitch_norm_deg
        + cfg.weight_timing * abs(timing_ms) / cfg.timing_norm_ms
        + cfg.weight_velocity * vel_err / max(v_max, 1e-9)
    )
    return PracticeScore(
        epoch_id=epoch_id,
        timing_offset_ms=timing_ms,
        yaw_error_deg=yaw_err,
        pitch_error_deg=pitch_err,
        velocity_error_deg_s=vel_err,
        category_match=practice.category == expert.category,
        composite=max(0.0, min(1.0, 1.0 - penalty)),
    )


def score_session(
    analysis: SessionAnalysis, practice_epochs: list[CommandEpoch]
) -> list[PracticeScore]:
    """Batch scoring of a completed practice run against the expert session."""
    cfg = analysis.config.scoring
    pairs = match_epochs(analysis.epochs, practice_epochs, cfg.match_window_frames)
    fps = analysis.session.manifest.fps
    v_max = analysis.haptic_calibration.v_max
    return [
        score_practice(exp, prac, i, fps, v_max, cfg)
        for i, (exp, prac) in enumerate(pairs)
    ]


@dataclass
class LiveUpdate:
    """Result of feeding one practice pose to the live annotator."""

    overlay: OverlaySpec | None = None
    finalized: list[CommandEpoch] = field(default_factory=list)
    dropped: bool = False


class LiveAnnotator:
    """Incremental practice pipeline: angles, smoothing and segmentation.

    Poses must arrive in ``received_seq`` order with non-decreasing frame
    indices; anything else is dropped and counted.  Smoothed values become
    final once the centered window closes behind the stream head, at which
    point they are fed to the same segmentation state machine the batch
    path uses; a practice epoch therefore finalizes a few frames after its
    retraction, well inside the 15-frame budget.
    """

    def __init__(self, analysis: SessionAnalysis):
        self.analysis = analysis
        cfg = analysis.config
        self._right_endpoint = cfg.kinematics.right_arm_endpoint
        self._window = cfg.kinematics.smoothing_window
        self._half = self._window // 2
        seg = cfg.segmentation
        self.segmentation_config = SegmentationConfig(
            rest_percentile=seg.rest_percentile,
            rest_band_deg=analysis.rest_level_deg,
            enter_hysteresis_deg=seg.enter_hysteresis_deg,
            retract_drop_deg=seg.retract_drop_deg,
            min_epoch_frames=seg.min_epoch_frames,
        )
        self._segmenter = EpochSegmenter(
            enter_threshold=analysis.rest_level_deg + seg.enter_hysteresis_deg,
            enter_hysteresis=seg.enter_hysteresis_deg,
            retract_drop=seg.retract_drop_deg,
            min_frames=seg.min_epoch_frames,
        )
        self._raw_yaw: list[float] = []
        self._raw_pitch: list[float] = []
        self._smoothed: list[float] = []
        self._fed = 0  # frames already given to the segmenter
        self._last_seq: int | None = None
        self._max_frame = -1
        self.dropped_count = 0

    def _frame_axes(self, frame: int):
        # practice poses reuse the expert recording's marker axes
        if 0 <= frame < len(self.analysis.axes):
            return self.analysis.axes[frame]
        return None

    def _extend_to(self, frame: int) -> None:
        while len(self._raw_yaw) <= frame:
            self._raw_yaw.append(math.nan)
            self._raw_pitch.append(math.nan)

    def _pose_angles(self, pose: PracticePose) -> tuple[float, float]:
        axes = self._frame_axes(pose.frame_index)
        if axes is None:
            return math.nan, math.nan
        try:
            vec = arm_vector(pose.right_arm, self._right_endpoint)
        except DegenerateVector:
            return math.nan, math.nan
        return angle_between(vec, axes.horizontal), angle_between(vec, axes.gravity)

    def _smooth_at(self, i: int) -> float:
        if math.isnan(self._raw_yaw[i]):
            return math.nan
        lo = max(0, i - self._half)
        chunk = [v for v in self._raw_yaw[lo : i + self._half + 1] if not math.isnan(v)]
        return float(np.mean(chunk)) if chunk else math.nan

    def _advance(self, upto: int) -> list[CommandEpoch]:
        """Finalize smoothed frames in [fed, upto) and run the segmenter."""
        finalized: list[CommandEpoch] = []
        while self._fed < upto:
            i = self._fed
            while len(self._smoothed) <= i:
                self._smoothed.append(math.nan)
            self._smoothed[i] = self._smooth_at(i)
            for span in self._segmenter.feed(i, self._smoothed[i]):
                finalized.append(self._build_epoch(span))
            self._fed += 1
        return finalized

    def _build_epoch(self, span: tuple[int, int, int]) -> CommandEpoch:
        start, peak, end = span
        yaw = self._raw_yaw[peak]
        if math.isnan(yaw):
            yaw = self._smoothed[peak]
        pitch = self._raw_pitch[peak]
        if math.isnan(pitch):
            pitch = 0.0
        smoothed = AngleSeries(
            values=np.array(self._smoothed, dtype=float),
            fps=self.analysis.session.manifest.fps,
            subject=Subject.RIGHT_ARM,
            measure=Measure.YAW,
        )
        velocity = angular_velocity(smoothed)
        chunk = velocity.values[start : end + 1]
        speeds = np.abs(chunk[~np.isnan(chunk)])
        peak_velocity = float(speeds.max()) if len(speeds) else None
        return CommandEpoch(
            start_frame=start,
            peak_frame=peak,
            end_frame=end,
            peak_angles=PoseAngles(yaw_deg=float(yaw), pitch_deg=float(pitch)),
            peak_velocity_deg_s=peak_velocity,
            category=classify_command(float(yaw)),
        )

    def feed_pose(self, pose: PracticePose) -> LiveUpdate:
        """Ingest one pose; returns the practice overlay and any epochs
        that finalized as a consequence."""
        if self._last_seq is not None and pose.received_seq <= self._last_seq:
            self.dropped_count += 1
            return LiveUpdate(dropped=True)
        if pose.frame_index < self._max_frame or pose.frame_index < 0:
            self.dropped_count += 1
            return LiveUpdate(dropped=True)
        self._last_seq = pose.received_seq
        self._max_frame = max(self._max_frame, pose.frame_index)

        self._extend_to(pose.frame_index)
        yaw, pitch = self._pose_angles(pose)
        self._raw_yaw[pose.frame_index] = yaw
        self._raw_pitch[pose.frame_index] = pitch

        finalized = self._advance(pose.frame_index - self._half)

        manifest = self.analysis.session.manifest
        overlay = OverlaySpec(
            kind=OverlayKind.SEGMENT,
            points=tuple(
                (
                    min(max(p.x, 0.0), float(manifest.frame_width)),
                    min(max(p.y, 0.0), float(manifest.frame_height)),
                )
                for p in pose.right_arm.points
            ),
            style_tag="practice-pose",
        )
        return LiveUpdate(overlay=overlay, finalized=finalized)

    def finish(self) -> list[CommandEpoch]:
        """Flush the stream end: finalize remaining frames and any open epoch."""
        finalized = self._advance(len(self._raw_yaw))
        for span in self._segmenter.finish():
            finalized.append(self._build_epoch(span))
        return finalized

    def raw_yaw_series(self) -> AngleSeries:
        """The accumulated raw yaw values as a batch-compatible series."""
        return AngleSeries(
            values=np.array(self._raw_yaw, dtype=float),
            fps=self.analysis.session.manifest.fps,
            subject=Subject.RIGHT_ARM,
            measure=Measure.YAW,
        )


class PracticeScorer:
    """Streams finalized practice epochs into scores against the expert.

    Each expert epoch is consumed at most once; a practice epoch with no
    expert peak within the match window scores zero with no epoch id.
    """

    def __init__(self, analysis: SessionAnalysis):
        self.analysis = analysis
        self._used: set[int] = set()

    def score_epoch(self, practice: CommandEpoch) -> PracticeScore:
        cfg = self.analysis.config.scoring
        best_idx = -1
        best_dist = cfg.match_window_frames + 1
        for i, exp in enumerate(self.analysis.epochs):
            if i in self._used:
                continue
            dist = abs(practice.peak_frame - exp.peak_frame)
            if dist <= cfg.match_window_frames and dist < best_dist:
                best_idx, best_dist = i, dist
        if best_idx < 0:
            return PracticeScore(
                epoch_id=None,
                timing_offset_ms=None,
                yaw_error_deg=None,
                pitch_error_deg=None,
                velocity_error_deg_s=None,
                category_match=False,
                composite=0.0,
            )
        self._used.add(best_idx)
        return score_practice(
            self.analysis.epochs[best_idx],
            practice,
            best_idx,
            self.analysis.session.manifest.fps,
            self.analysis.haptic_calibration.v_max,
            cfg,
        )
