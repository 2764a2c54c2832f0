"""Vibration track synthesis for both hands.

Right hand: frequency follows the right-elbow angular velocity across the
50-300 Hz range, amplitude follows the pose angle.  Left hand: fixed-pitch
alert pulses when the forearm leaves its natural walking band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .config import HapticsConfig
from .errors import InsufficientCalibration
from .kinematics import AngleSeries, Measure, Subject, VelocitySeries

if TYPE_CHECKING:  # pragma: no cover
    from .analysis import SessionAnalysis

FREQ_MIN_HZ = 50.0
FREQ_MAX_HZ = 300.0


class Hand(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class HapticEvent:
    hand: Hand
    start_frame: int
    duration_frames: int
    frequency_hz: float
    amplitude: float

    def __post_init__(self):
        if self.duration_frames < 1:
            raise ValueError("duration_frames must be >= 1")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ValueError(f"amplitude {self.amplitude} outside [0, 1]")
        if self.hand is Hand.RIGHT and not FREQ_MIN_HZ <= self.frequency_hz <= FREQ_MAX_HZ:
            raise ValueError(f"right-hand frequency {self.frequency_hz} outside the 50-300 Hz range")

    def to_json_dict(self) -> dict:
        return {
            "hand": self.hand.value,
            "start_frame": self.start_frame,
            "duration_frames": self.duration_frames,
            "frequency_hz": self.frequency_hz,
            "amplitude": self.amplitude,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HapticEvent":
        return cls(
            hand=Hand(data["hand"]),
            start_frame=int(data["start_frame"]),
            duration_frames=int(data["duration_frames"]),
            frequency_hz=float(data["frequency_hz"]),
            amplitude=float(data["amplitude"]),
        )


@dataclass(frozen=True)
class HapticCalibration:
    """Endpoints of the velocity->frequency and angle->amplitude maps."""

    v_min: float
    v_max: float
    yaw_min: float
    yaw_max: float
    amp_floor: float

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ValueError(f"need v_min < v_max, got {self.v_min} >= {self.v_max}")
        if not self.yaw_min < self.yaw_max:
            raise ValueError(f"need yaw_min < yaw_max, got {self.yaw_min} >= {self.yaw_max}")
        if not 0.0 <= self.amp_floor < 1.0:
            raise ValueError(f"amp_floor {self.amp_floor} outside [0, 1)")


@dataclass(frozen=True)
class WalkingBand:
    """Natural range of left-forearm motion while walking."""

    yaw_band: tuple[float, float]
    pitch_band: tuple[float, float]

    def __post_init__(self):
        if not self.yaw_band[0] < self.yaw_band[1]:
            raise ValueError(f"yaw band {self.yaw_band} not increasing")
        if not self.pitch_band[0] < self.pitch_band[1]:
            raise ValueError(f"pitch band {self.pitch_band} not increasing")

    def excursion(self, yaw: float, pitch: float) -> float:
        """Distance (deg) outside the band; 0 when inside on both axes."""
        out = 0.0
        for value, (lo, hi) in ((yaw, self.yaw_band), (pitch, self.pitch_band)):
            if math.isnan(value):
                continue
            if value < lo:
                out = max(out, lo - value)
            elif value > hi:
                out = max(out, value - hi)
        return out


def frequency_from_velocity(v_deg_s: float, calib: HapticCalibration) -> float:
    """Linear map of |velocity| from [v_min, v_max] to [50, 300] Hz, clamped."""
    speed = abs(v_deg_s)
    t = (speed - calib.v_min) / (calib.v_max - calib.v_min)
    t = max(0.0, min(1.0, t))
    return FREQ_MIN_HZ + t * (FREQ_MAX_HZ - FREQ_MIN_HZ)


def amplitude_from_angle(yaw_deg: float, calib: HapticCalibration) -> float:
    """Linear map of yaw from [yaw_min, yaw_max] to [amp_floor, 1], clamped."""
    t = (yaw_deg - calib.yaw_min) / (calib.yaw_max - calib.yaw_min)
    t = max(0.0, min(1.0, t))
    return calib.amp_floor + t * (1.0 - calib.amp_floor)


def calibrate_velocity_endpoints(
    velocity: VelocitySeries,
    epoch_spans: list[tuple[int, int]],
    config: HapticsConfig | None = None,
) -> HapticCalibration:
    """Per-session velocity endpoints from |velocity| percentiles within epochs.

    Falls back to fixed endpoints when a session has no usable in-epoch
    velocity samples.
    """
    cfg = config or HapticsConfig()
    samples: list[float] = []
    for start, end in epoch_spans:
        chunk = velocity.values[start : end + 1]
        samples.extend(abs(float(v)) for v in chunk if not math.isnan(v))
    if samples:
        lo, hi = np.percentile(samples, list(cfg.velocity_percentiles))
        if hi - lo > 1e-9:
            return HapticCalibration(
                v_min=float(lo),
                v_max=float(hi),
                yaw_min=cfg.amplitude_yaw_min_deg,
                yaw_max=cfg.amplitude_yaw_max_deg,
                amp_floor=cfg.amplitude_floor,
            )
    return HapticCalibration(
        v_min=cfg.fallback_v_min_deg_s,
        v_max=cfg.fallback_v_max_deg_s,
        yaw_min=cfg.amplitude_yaw_min_deg,
        yaw_max=cfg.amplitude_yaw_max_deg,
        amp_floor=cfg.amplitude_floor,
    )


def estimate_walking_band(
    yaw: AngleSeries,
    pitch: AngleSeries,
    calibration_window: tuple[int, int],
    config: HapticsConfig | None = None,
) -> WalkingBand:
    """Percentile band of the left forearm over a calibration window.

    ``calibration_window`` is a half-open (start, stop) frame range.  The
    band is the [p5, p95] interval of each measure widened by the margin.

    Raises:
        InsufficientCalibration: fewer than the configured seconds of
            frames with both angles present.
    """
    cfg = config or HapticsConfig()
    start, stop = calibration_window
    y = yaw.values[start:stop]
    p = pitch.values[start:stop]
    ok = ~(np.isnan(y) | np.isnan(p))
    needed = int(math.ceil(cfg.min_calibration_seconds * yaw.fps))
    if int(ok.sum()) < needed:
        raise InsufficientCalibration(
            f"calibration window has {int(ok.sum())} usable frames, need {needed}"
        )
    lo_q, hi_q = cfg.band_percentiles
    y_lo, y_hi = np.percentile(y[ok], [lo_q, hi_q])
    p_lo, p_hi = np.percentile(p[ok], [lo_q, hi_q])
    m = cfg.band_margin_deg
    return WalkingBand(
        yaw_band=(float(y_lo) - m, float(y_hi) + m),
        pitch_band=(float(p_lo) - m, float(p_hi) + m),
    )


def left_hand_alerts(
    yaw: AngleSeries,
    pitch: AngleSeries,
    band: WalkingBand,
    config: HapticsConfig | None = None,
) -> list[HapticEvent]:
    """One fixed-frequency event per sustained excursion outside the band."""
    cfg = config or HapticsConfig()
    events: list[HapticEvent] = []
    run_start = -1
    run_peak = 0.0

    def close(end_frame: int):
        nonlocal run_start, run_peak
        if run_start >= 0:
            length = end_frame - run_start + 1
            if length >= cfg.left_sustain_frames:
                amp = min(1.0, run_peak / cfg.left_excursion_full_scale_deg)
                events.append(
                    HapticEvent(
                        hand=Hand.LEFT,
                        start_frame=run_start,
                        duration_frames=length,
                        frequency_hz=cfg.left_frequency_hz,
                        amplitude=amp,
                    )
                )
        run_start, run_peak = -1, 0.0

    n = len(yaw.values)
    for i in range(n):
        exc = band.excursion(float(yaw.values[i]), float(pitch.values[i]))
        both_absent = math.isnan(yaw.values[i]) and math.isnan(pitch.values[i])
        if exc > 0.0 and not both_absent:
            if run_start < 0:
                run_start = i
            run_peak = max(run_peak, exc)
        else:
            close(i - 1)
    close(n - 1)
    return events


def right_hand_events(
    epoch_spans: list[tuple[int, int]],
    velocity: VelocitySeries,
    raw_yaw: AngleSeries,
    calib: HapticCalibration,
    config: HapticsConfig | None = None,
) -> list[HapticEvent]:
    """Per-frame right-hand vibration inside command epochs, merged into
    runs whose internal frequency spread stays under the merge tolerance.

    Each run reports its strongest frame, so the event covering the
    peak-velocity frame carries exactly the frequency that velocity maps
    to.
    """
    cfg = config or HapticsConfig()
    events: list[HapticEvent] = []
    for start, end in epoch_spans:
        run: list[tuple[int, float, float]] = []  # (frame, freq, amp)

        def close():
            nonlocal run
            if run:
                events.append(
                    HapticEvent(
                        hand=Hand.RIGHT,
                        start_frame=run[0][0],
                        duration_frames=run[-1][0] - run[0][0] + 1,
                        frequency_hz=max(f for _, f, _ in run),
                        amplitude=max(a for _, _, a in run),
                    )
                )
            run = []

        for frame in range(start, end + 1):
            v = velocity.values[frame]
            y = raw_yaw.values[frame]
            if math.isnan(v) or math.isnan(y):
                close()
                continue
            freq = frequency_from_velocity(float(v), calib)
            amp = amplitude_from_angle(float(y), calib)
            if run:
                freqs = [f for _, f, _ in run] + [freq]
                amps = [a for _, _, a in run] + [amp]
                if (max(freqs) - min(freqs) >= cfg.merge_frequency_hz
                        or max(amps) - min(amps) >= cfg.merge_amplitude):
                    close()
            run.append((frame, freq, amp))
        close()
    return events


def synthesize_haptic_track(analysis: "SessionAnalysis") -> list[HapticEvent]:
    """Full dual-hand track for an analyzed session, sorted by start frame.

    Right-hand events only ever occur inside command epochs; left-hand
    alerts come from walking-band excursions.  Sessions with no epochs and
    an in-band left arm produce an empty track.
    """
    spans = [(e.start_frame, e.end_frame) for e in analysis.epochs]
    events = right_hand_events(
        spans,
        analysis.right_velocity,
        analysis.raw_series[(Subject.RIGHT_ARM, Measure.YAW)],
        analysis.haptic_calibration,
        analysis.config.haptics,
    )
    if analysis.walking_band is not None:
        events.extend(
            left_hand_alerts(
                analysis.raw_series[(Subject.LEFT_FOREARM, Measure.YAW)],
                analysis.raw_series[(Subject.LEFT_FOREARM, Measure.PITCH)],
                analysis.walking_band,
                analysis.config.haptics,
            )
        )
    return sorted(events, key=lambda e: (e.start_frame, e.hand.value))
