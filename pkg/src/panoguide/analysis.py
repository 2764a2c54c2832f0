"""Whole-session analysis: runs every per-frame and per-epoch computation
once and hands the result to cues, haptics, reports, scoring and replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .commands import (
    CommandEpoch,
    StatusThresholds,
    TriggerEvent,
    classify_command,
    classify_dog_status,
    detect_head_turn_triggers,
    estimate_rest_level,
    fit_status_thresholds,
    segment_commands,
)
from .config import PipelineConfig
from .errors import DegenerateClusters, EmptySeries, TooFewSamples
from .haptics import (
    HapticCalibration,
    HapticEvent,
    WalkingBand,
    calibrate_velocity_endpoints,
    estimate_walking_band,
    synthesize_haptic_track,
)
from .errors import InsufficientCalibration
from .kinematics import (
    AngleSeries,
    Measure,
    PoseAngles,
    Subject,
    VelocitySeries,
    angle_series,
    angular_velocity,
    axes_per_frame,
    smooth_series,
)
from .session import Session

SeriesKey = tuple[Subject, Measure]


@dataclass
class SessionAnalysis:
    """Everything derived from one session under one configuration."""

    session: Session
    config: PipelineConfig
    axes: list  # per-frame AxesFrame | None
    raw_series: dict[SeriesKey, AngleSeries]
    smoothed_right_yaw: AngleSeries
    smoothed_head: AngleSeries
    right_velocity: VelocitySeries
    rest_level_deg: float
    epochs: list[CommandEpoch]
    status_thresholds: StatusThresholds | None
    triggers: list[TriggerEvent]
    walking_band: WalkingBand | None
    haptic_calibration: HapticCalibration
    haptic_track: list[HapticEvent] = field(default_factory=list)

    @property
    def frame_count(self) -> int:
        return self.session.manifest.frame_count

    def epoch_at(self, frame: int, lead_frames: int = 0) -> CommandEpoch | None:
        """Epoch whose span (optionally extended by a lead window) covers a frame."""
        for epoch in self.epochs:
            if epoch.start_frame - lead_frames <= frame <= epoch.end_frame:
                return epoch
        return None

    def triggers_at(self, frame: int, cue_frames: int) -> list[TriggerEvent]:
        return [t for t in self.triggers if t.frame <= frame < t.frame + cue_frames]


def _epoch_peak_velocity(velocity: VelocitySeries, start: int, end: int) -> float | None:
    chunk = velocity.values[start : end + 1]
    speeds = np.abs(chunk[~np.isnan(chunk)])
    if len(speeds) == 0:
        return None
    return float(speeds.max())


def analyze_session(session: Session, config: PipelineConfig | None = None) -> SessionAnalysis:
    """Run the full pipeline over a loaded session.

    Raises:
        NoMarkerEver: the session has no usable marker anywhere.
        EmptySeries: the right-arm series has no present values.
    """
    cfg = config or PipelineConfig()
    axes = axes_per_frame(session, cfg.kinematics.marker_lookback_frames)

    raw: dict[SeriesKey, AngleSeries] = {}
    for subject, measures in (
        (Subject.RIGHT_ARM, (Measure.YAW, Measure.PITCH)),
        (Subject.LEFT_FOREARM, (Measure.YAW, Measure.PITCH)),
        (Subject.DOG_HEAD, (Measure.YAW,)),
        (Subject.DOG_BACK, (Measure.YAW,)),
    ):
        for measure in measures:
            raw[(subject, measure)] = angle_series(
                session, subject, measure, cfg.kinematics, axes=axes
            )

    window = cfg.kinematics.smoothing_window
    smoothed_right = smooth_series(raw[(Subject.RIGHT_ARM, Measure.YAW)], window)
    smoothed_head = smooth_series(raw[(Subject.DOG_HEAD, Measure.YAW)], window)
    velocity = angular_velocity(smoothed_right)

    rest = estimate_rest_level(smoothed_right.values, cfg.segmentation)
    epochs = segment_commands(smoothed_right, cfg.segmentation)

    raw_yaw = raw[(Subject.RIGHT_ARM, Measure.YAW)]
    raw_pitch = raw[(Subject.RIGHT_ARM, Measure.PITCH)]
    head_raw = raw[(Subject.DOG_HEAD, Measure.YAW)]

    for epoch in epochs:
        y = float(raw_yaw.values[epoch.peak_frame])
        p = float(raw_pitch.values[epoch.peak_frame])
        if math.isnan(y):  # raw gap at a smoothed peak: fall back to smoothed
            y = float(smoothed_right.values[epoch.peak_frame])
        if math.isnan(p):
            p = 0.0
        epoch.peak_angles = PoseAngles(yaw_deg=y, pitch_deg=p)
        epoch.peak_velocity_deg_s = _epoch_peak_velocity(
            velocity, epoch.start_frame, epoch.end_frame
        )
        epoch.category = classify_command(y)

    thresholds: StatusThresholds | None = None
    if cfg.status.low_high_split is not None and cfg.status.mid_high_split is not None:
        thresholds = StatusThresholds(cfg.status.low_high_split, cfg.status.mid_high_split)
    else:
        head_at_peaks = [
            float(head_raw.values[e.peak_frame])
            for e in epochs
            if not math.isnan(head_raw.values[e.peak_frame])
        ]
        try:
            thresholds = fit_status_thresholds(head_at_peaks)
        except (TooFewSamples, DegenerateClusters):
            thresholds = None
    if thresholds is not None:
        for epoch in epochs:
            h = head_raw.values[epoch.peak_frame]
            if not math.isnan(h):
                epoch.dog_status_at_peak = classify_dog_status(float(h), thresholds)

    triggers = detect_head_turn_triggers(smoothed_head, cfg.triggers)

    band: WalkingBand | None
    try:
        band = estimate_walking_band(
            raw[(Subject.LEFT_FOREARM, Measure.YAW)],
            raw[(Subject.LEFT_FOREARM, Measure.PITCH)],
            (0, session.manifest.frame_count),
            cfg.haptics,
        )
    except InsufficientCalibration:
        band = None

    calibration = calibrate_velocity_endpoints(
        velocity, [(e.start_frame, e.end_frame) for e in epochs], cfg.haptics
    )

    analysis = SessionAnalysis(
        session=session,
        config=cfg,
        axes=axes,
        raw_series=raw,
        smoothed_right_yaw=smoothed_right,
        smoothed_head=smoothed_head,
        right_velocity=velocity,
        rest_level_deg=rest,
        epochs=epochs,
        status_thresholds=thresholds,
        triggers=triggers,
        walking_band=band,
        haptic_calibration=calibration,
    )
    analysis.haptic_track = synthesize_haptic_track(analysis)
    return analysis
