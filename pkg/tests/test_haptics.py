import math

import numpy as np
import pytest

from panoguide.analysis import analyze_session
from panoguide.config import HapticsConfig
from panoguide.errors import InsufficientCalibration
from panoguide.fixtures import FixtureSpec, PlantedEpoch, generate
from panoguide.haptics import (
    Hand,
    HapticCalibration,
    HapticEvent,
    WalkingBand,
    amplitude_from_angle,
    estimate_walking_band,
    frequency_from_velocity,
    left_hand_alerts,
)
from panoguide.kinematics import AngleSeries, Measure, Subject

CALIB = HapticCalibration(v_min=20.0, v_max=220.0, yaw_min=90.0, yaw_max=150.0, amp_floor=0.2)


def series(values, fps=30.0, subject=Subject.LEFT_FOREARM, measure=Measure.YAW):
    return AngleSeries(np.array(values, dtype=float), fps, subject, measure)


class TestFrequencyMap:
    def test_endpoints(self):
        assert frequency_from_velocity(CALIB.v_min, CALIB) == 50.0
        assert frequency_from_velocity(CALIB.v_max, CALIB) == 300.0

    def test_midpoint(self):
        mid = (CALIB.v_min + CALIB.v_max) / 2
        assert frequency_from_velocity(mid, CALIB) == pytest.approx(175.0)

    def test_clamped(self):
        assert frequency_from_velocity(2 * CALIB.v_max, CALIB) == 300.0
        assert frequency_from_velocity(0.0, CALIB) == 50.0

    def test_sign_ignored(self):
        assert frequency_from_velocity(-CALIB.v_max, CALIB) == 300.0

    def test_monotone_bounded_sweep(self):
        speeds = np.linspace(-50, 400, 1000)
        freqs = [frequency_from_velocity(float(v), CALIB) for v in np.abs(speeds)]
        assert all(50.0 <= f <= 300.0 for f in freqs)
        ordered = sorted(np.abs(speeds))
        fs = [frequency_from_velocity(float(v), CALIB) for v in ordered]
        assert all(a <= b + 1e-12 for a, b in zip(fs, fs[1:]))


class TestAmplitudeMap:
    def test_endpoints(self):
        assert amplitude_from_angle(90.0, CALIB) == pytest.approx(0.2)
        assert amplitude_from_angle(150.0, CALIB) == pytest.approx(1.0)

    def test_midpoint(self):
        assert amplitude_from_angle(120.0, CALIB) == pytest.approx(0.6)

    def test_clamped(self):
        assert amplitude_from_angle(10.0, CALIB) == pytest.approx(0.2)
        assert amplitude_from_angle(179.0, CALIB) == pytest.approx(1.0)

    def test_monotone(self):
        yaws = np.linspace(0, 180, 500)
        amps = [amplitude_from_angle(float(y), CALIB) for y in yaws]
        assert all(a <= b + 1e-12 for a, b in zip(amps, amps[1:]))
        assert all(0.2 <= a <= 1.0 for a in amps)


class TestWalkingBand:
    def test_constant_window_margin_only(self):
        yaw = series([85.0] * 120)
        pitch = series([5.0] * 120, measure=Measure.PITCH)
        band = estimate_walking_band(yaw, pitch, (0, 120))
        assert band.yaw_band == pytest.approx((80.0, 90.0))
        assert band.pitch_band == pytest.approx((0.0, 10.0))

    def test_sinusoid_percentiles(self):
        t = np.arange(600)
        vals = 85.0 + 8.0 * np.sin(2 * math.pi * t / 36.0)
        yaw = series(vals)
        pitch = series(np.abs(90.0 - vals), measure=Measure.PITCH)
        band = estimate_walking_band(yaw, pitch, (0, 600))
        # p5/p95 of a sine of amplitude 8 sit near +-7.9, widened by 5
        assert band.yaw_band[0] == pytest.approx(85.0 - 12.9, abs=0.5)
        assert band.yaw_band[1] == pytest.approx(85.0 + 12.9, abs=0.5)

    def test_insufficient_window(self):
        yaw = series([85.0] * 30)
        pitch = series([5.0] * 30, measure=Measure.PITCH)
        with pytest.raises(InsufficientCalibration):
            estimate_walking_band(yaw, pitch, (0, 30))

    def test_excursion_distance(self):
        band = WalkingBand(yaw_band=(80.0, 90.0), pitch_band=(0.0, 10.0))
        assert band.excursion(85.0, 5.0) == 0.0
        assert band.excursion(95.0, 5.0) == 5.0
        assert band.excursion(85.0, 22.0) == 12.0
        assert band.excursion(70.0, 22.0) == 12.0


class TestLeftHandAlerts:
    BAND = WalkingBand(yaw_band=(80.0, 90.0), pitch_band=(-10.0, 20.0))

    def test_inside_band_empty(self):
        yaw = series([85.0] * 60)
        pitch = series([5.0] * 60, measure=Measure.PITCH)
        assert left_hand_alerts(yaw, pitch, self.BAND) == []

    def test_single_excursion(self):
        vals = [85.0] * 20 + [110.0] * 10 + [85.0] * 20
        yaw = series(vals)
        pitch = series([5.0] * 50, measure=Measure.PITCH)
        events = left_hand_alerts(yaw, pitch, self.BAND)
        assert len(events) == 1
        event = events[0]
        assert event.hand is Hand.LEFT
        assert event.start_frame == 20
        assert event.duration_frames == 10
        assert event.frequency_hz == 120.0
        assert event.amplitude == pytest.approx(1.0)  # 20 deg excursion at full scale

    def test_short_blip_ignored(self):
        vals = [85.0] * 20 + [110.0] * 2 + [85.0] * 20
        yaw = series(vals)
        pitch = series([5.0] * 42, measure=Measure.PITCH)
        assert left_hand_alerts(yaw, pitch, self.BAND) == []

    def test_amplitude_proportional(self):
        vals = [85.0] * 20 + [95.0] * 5 + [85.0] * 20  # 5 deg beyond band edge
        yaw = series(vals)
        pitch = series([5.0] * 45, measure=Measure.PITCH)
        events = left_hand_alerts(yaw, pitch, self.BAND, HapticsConfig())
        assert events[0].amplitude == pytest.approx(5.0 / 20.0)


def analyzed_fixture(epochs, frame_count=400, seed=2, **kwargs):
    spec = FixtureSpec(seed=seed, frame_count=frame_count, planted_epochs=epochs, **kwargs)
    session, _ = generate(spec)
    return analyze_session(session)


class TestSynthesizedTrack:
    def test_quiet_session_empty_track(self):
        analysis = analyzed_fixture([])
        assert analysis.haptic_track == []

    def test_one_epoch_produces_right_events(self):
        analysis = analyzed_fixture([PlantedEpoch(100, 115, 130, 130.0, 40.0)])
        right = [e for e in analysis.haptic_track if e.hand is Hand.RIGHT]
        assert right
        assert all(50.0 <= e.frequency_hz <= 300.0 for e in right)
        span = (analysis.epochs[0].start_frame, analysis.epochs[0].end_frame)
        for e in right:
            assert span[0] <= e.start_frame
            assert e.start_frame + e.duration_frames - 1 <= span[1]

    def test_no_right_event_outside_epochs(self):
        analysis = analyzed_fixture(
            [PlantedEpoch(100, 112, 124, 120.0, 30.0), PlantedEpoch(220, 232, 244, 140.0, 50.0)]
        )
        spans = [(e.start_frame, e.end_frame) for e in analysis.epochs]
        for event in analysis.haptic_track:
            if event.hand is not Hand.RIGHT:
                continue
            last = event.start_frame + event.duration_frames - 1
            assert any(s <= event.start_frame and last <= e for s, e in spans)

    def test_peak_velocity_frame_frequency_composition(self):
        analysis = analyzed_fixture([PlantedEpoch(100, 115, 130, 130.0, 40.0)])
        epoch = analysis.epochs[0]
        speeds = np.abs(analysis.right_velocity.values[epoch.start_frame : epoch.end_frame + 1])
        peak_frame = epoch.start_frame + int(np.nanargmax(speeds))
        expected = frequency_from_velocity(
            float(epoch.peak_velocity_deg_s), analysis.haptic_calibration
        )
        covering = [
            e
            for e in analysis.haptic_track
            if e.hand is Hand.RIGHT
            and e.start_frame <= peak_frame <= e.start_frame + e.duration_frames - 1
        ]
        assert len(covering) == 1
        assert covering[0].frequency_hz == pytest.approx(expected, abs=1e-9)

    def test_track_sorted_non_overlapping_per_hand(self):
        analysis = analyzed_fixture(
            [PlantedEpoch(80 + 120 * k, 95 + 120 * k, 110 + 120 * k, 120.0, 30.0) for k in range(2)],
            left_excursions=[(300, 320, 30.0)],
        )
        track = analysis.haptic_track
        assert track == sorted(track, key=lambda e: (e.start_frame, e.hand.value))
        for hand in Hand:
            events = [e for e in track if e.hand is hand]
            for a, b in zip(events, events[1:]):
                assert a.start_frame + a.duration_frames <= b.start_frame

    def test_left_alert_from_planted_excursion(self):
        # excursion must be sparse relative to the percentile window
        analysis = analyzed_fixture(
            [],
            frame_count=1200,
            left_excursions=[(150, 170, 30.0)],
        )
        left = [e for e in analysis.haptic_track if e.hand is Hand.LEFT]
        assert len(left) == 1
        assert left[0].start_frame == pytest.approx(150, abs=2)
        assert left[0].duration_frames == pytest.approx(21, abs=3)


class TestHapticEventValidation:
    def test_right_frequency_range_enforced(self):
        with pytest.raises(ValueError):
            HapticEvent(Hand.RIGHT, 0, 10, 20.0, 0.5)

    def test_amplitude_range(self):
        with pytest.raises(ValueError):
            HapticEvent(Hand.LEFT, 0, 10, 120.0, 1.5)

    def test_calibration_validation(self):
        with pytest.raises(ValueError):
            HapticCalibration(v_min=10.0, v_max=10.0, yaw_min=90.0, yaw_max=150.0, amp_floor=0.2)
