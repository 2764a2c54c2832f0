import math

import numpy as np
import pytest

from panoguide.config import KinematicsConfig
from panoguide.errors import DegenerateVector, NoMarkerEver
from panoguide.fixtures import FixtureSpec, generate
from panoguide.geometry import AxesFrame
from panoguide.kinematics import (
    AngleSeries,
    Measure,
    Subject,
    angle_series,
    angular_velocity,
    arm_vector,
    dog_back_vector,
    dog_head_vector,
    pose_angles,
    smooth_series,
)
from panoguide.session import (
    ArmKeypoints,
    DogKeypoints,
    FrameRecord,
    Keypoint,
    Session,
    SessionManifest,
)

IDENTITY_AXES = AxesFrame(horizontal=(1.0, 0.0), gravity=(0.0, 1.0))


def kp(x, y, c=1.0):
    return Keypoint(float(x), float(y), c)


def dog_with(ears, neck, forelimbs=((0, 0), (2, 0)), waist=(1, 5)):
    return DogKeypoints(
        ears=(kp(*ears[0]), kp(*ears[1])),
        neck=kp(*neck),
        scapula=kp(1, 1),
        forelimbs=(kp(*forelimbs[0]), kp(*forelimbs[1])),
        waist=kp(*waist),
    )


class TestSkeletonVectors:
    def test_dog_head_midpoint(self):
        dog = dog_with(ears=((10, 0), (14, 0)), neck=(12, 8))
        assert dog_head_vector(dog).tolist() == [0.0, -8.0]

    def test_dog_head_hand_arithmetic(self):
        dog = dog_with(ears=((0, 0), (2, 2)), neck=(1, 5))
        assert dog_head_vector(dog).tolist() == [0.0, -4.0]

    def test_dog_head_degenerate(self):
        dog = dog_with(ears=((1, 5), (1, 5)), neck=(1, 5))
        with pytest.raises(DegenerateVector):
            dog_head_vector(dog)

    def test_dog_back(self):
        dog = dog_with(ears=((0, 0), (1, 0)), neck=(0, 5), forelimbs=((0, 0), (2, 0)), waist=(1, -6))
        assert dog_back_vector(dog).tolist() == [0.0, -6.0]

    def test_dog_back_hand_arithmetic(self):
        dog = dog_with(ears=((0, 0), (1, 0)), neck=(0, 5), forelimbs=((1, 1), (3, 3)), waist=(5, 0))
        assert dog_back_vector(dog).tolist() == [3.0, -2.0]

    def test_dog_back_degenerate(self):
        dog = dog_with(ears=((0, 0), (1, 0)), neck=(0, 5), forelimbs=((0, 0), (2, 0)), waist=(1, 0))
        with pytest.raises(DegenerateVector):
            dog_back_vector(dog)

    def test_right_arm_finger_minus_elbow(self):
        arm = ArmKeypoints(side="Right", points=(kp(10, 2), kp(6, 2), kp(2, 2)))
        assert arm_vector(arm).tolist() == [8.0, 0.0]

    def test_right_arm_wrist_mode(self):
        arm = ArmKeypoints(side="Right", points=(kp(10, 2), kp(6, 2), kp(2, 2)))
        assert arm_vector(arm, right_endpoint="wrist").tolist() == [4.0, 0.0]

    def test_left_arm_wrist_minus_elbow(self):
        arm = ArmKeypoints(side="Left", points=(kp(0, 4), kp(0, 0), kp(0, -4)))
        assert arm_vector(arm).tolist() == [0.0, 4.0]


class TestPoseAngles:
    def test_horizontal_vector(self):
        angles = pose_angles((1.0, 0.0), IDENTITY_AXES)
        assert angles.yaw_deg == pytest.approx(0.0)
        assert angles.pitch_deg == pytest.approx(90.0)

    def test_vertical_vector(self):
        angles = pose_angles((0.0, 1.0), IDENTITY_AXES)
        assert angles.yaw_deg == pytest.approx(90.0)
        assert angles.pitch_deg == pytest.approx(0.0)

    def test_rotated_axes(self):
        c = math.cos(math.radians(45))
        axes = AxesFrame(horizontal=(c, c), gravity=(-c, c))
        angles = pose_angles((1.0, 1.0), axes)
        assert angles.yaw_deg == pytest.approx(0.0, abs=1e-9)
        assert angles.pitch_deg == pytest.approx(90.0, abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            v = rng.uniform(-4, 4, 2)
            if np.linalg.norm(v) < 1e-6:
                continue
            s = float(rng.uniform(0.01, 50))
            a = pose_angles(v, IDENTITY_AXES)
            b = pose_angles(s * v, IDENTITY_AXES)
            assert a.yaw_deg == pytest.approx(b.yaw_deg, abs=1e-9)
            assert a.pitch_deg == pytest.approx(b.pitch_deg, abs=1e-9)


def series(values, fps=30.0):
    return AngleSeries(
        values=np.array(values, dtype=float),
        fps=fps,
        subject=Subject.RIGHT_ARM,
        measure=Measure.YAW,
    )


class TestSmoothing:
    def test_window_one_identity(self):
        s = series([5.0, 10.0, 15.0])
        out = smooth_series(s, 1)
        assert out.values.tolist() == [5.0, 10.0, 15.0]

    def test_constant_unchanged(self):
        s = series([7.0] * 10)
        out = smooth_series(s, 5)
        assert out.values.tolist() == [7.0] * 10

    def test_simple_average(self):
        out = smooth_series(series([0.0, 30.0, 0.0]), 3)
        assert out.values[1] == pytest.approx(10.0)

    def test_absent_stays_absent(self):
        out = smooth_series(series([1.0, math.nan, 3.0]), 3)
        assert math.isnan(out.values[1])
        # present neighbours average over present values only
        assert out.values[0] == pytest.approx(1.0)
        assert out.values[2] == pytest.approx(3.0)
        out5 = smooth_series(series([1.0, math.nan, 3.0]), 5)
        assert out5.values[0] == pytest.approx(2.0)

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            smooth_series(series([1.0]), 2)

    def test_envelope_property(self):
        rng = np.random.default_rng(2)
        vals = rng.uniform(0, 180, 200)
        out = smooth_series(series(vals), 7)
        for i, v in enumerate(out.values):
            window = vals[max(0, i - 3) : i + 4]
            assert window.min() - 1e-9 <= v <= window.max() + 1e-9


class TestAngularVelocity:
    def test_constant_zero(self):
        v = angular_velocity(series([12.0] * 6))
        assert v.values.tolist() == [0.0] * 6

    def test_linear_ramp(self):
        v = angular_velocity(series(list(range(10)), fps=30.0))
        assert v.values.tolist() == [30.0] * 10

    def test_gap_neighbor_rule(self):
        vals = [0.0, 1.0, math.nan, 3.0, 4.0, 5.0]
        v = angular_velocity(series(vals, fps=30.0)).values
        assert math.isnan(v[1]) and math.isnan(v[2]) and math.isnan(v[3])
        assert not math.isnan(v[0]) and not math.isnan(v[4]) and not math.isnan(v[5])


def single_frame_session(records, frame_count=None, fps=30.0):
    from panoguide.geometry import ViewParams

    manifest = SessionManifest(
        session_id="k1",
        dataset_name="unit",
        fps=fps,
        frame_count=frame_count or len(records),
        frame_width=640,
        frame_height=640,
        view=ViewParams(theta_deg=0, phi_deg=0, fov_deg=90),
    )
    return Session(manifest=manifest, frames=records, annotations=[])


MARKER_SQUARE = (kp(500, 380), kp(560, 380), kp(560, 440), kp(500, 440))


def frame(i, dog=None, marker=True):
    from panoguide.session import MarkerFrame

    return FrameRecord(
        frame_index=i,
        timestamp_s=i / 30.0,
        dog=dog,
        marker=MarkerFrame(corners=MARKER_SQUARE) if marker else None,
    )


class TestAngleSeries:
    def test_constant_geometry(self):
        dog = dog_with(ears=((100, 100), (110, 100)), neck=(105, 150))
        records = [frame(i, dog=dog) for i in range(3)]
        s = angle_series(single_frame_session(records), Subject.DOG_HEAD)
        assert len(s) == 3
        assert np.allclose(s.values, s.values[0])

    def test_missing_subject_absent(self):
        dog = dog_with(ears=((100, 100), (110, 100)), neck=(105, 150))
        records = [frame(0, dog=dog), frame(1, dog=None), frame(2, dog=dog)]
        s = angle_series(single_frame_session(records), Subject.DOG_HEAD)
        assert math.isnan(s.values[1])
        assert not math.isnan(s.values[0])

    def test_marker_fallback(self):
        dog = dog_with(ears=((100, 100), (110, 100)), neck=(105, 150))
        records = [frame(0, dog=dog), frame(1, dog=dog, marker=False), frame(2, dog=dog)]
        s = angle_series(single_frame_session(records), Subject.DOG_HEAD)
        assert s.values[1] == pytest.approx(s.values[0])

    def test_marker_beyond_lookback_absent(self):
        dog = dog_with(ears=((100, 100), (110, 100)), neck=(105, 150))
        records = [frame(0, dog=dog)] + [frame(i, dog=dog, marker=False) for i in range(1, 20)]
        cfg = KinematicsConfig(marker_lookback_frames=3)
        s = angle_series(single_frame_session(records), Subject.DOG_HEAD, config=cfg)
        assert not math.isnan(s.values[3])
        assert math.isnan(s.values[4])

    def test_no_marker_ever(self):
        records = [frame(i, marker=False) for i in range(3)]
        with pytest.raises(NoMarkerEver):
            angle_series(single_frame_session(records), Subject.DOG_HEAD)

    def test_length_matches_frame_count_with_gaps(self):
        dog = dog_with(ears=((100, 100), (110, 100)), neck=(105, 150))
        records = [frame(0, dog=dog), frame(5, dog=dog)]
        s = angle_series(single_frame_session(records, frame_count=8), Subject.DOG_HEAD)
        assert len(s) == 8


def test_fixture_angles_recover_planted_trajectory():
    from panoguide.fixtures import PlantedEpoch

    spec = FixtureSpec(
        seed=1,
        frame_count=120,
        planted_epochs=[PlantedEpoch(start=30, peak=45, end=60, peak_yaw=120.0, peak_pitch=30.0)],
        marker_motion="slow-drift",
    )
    session, _ = generate(spec)
    s = angle_series(session, Subject.RIGHT_ARM, Measure.YAW)
    assert s.values[0] == pytest.approx(60.0, abs=1e-9)
    assert s.values[45] == pytest.approx(120.0, abs=1e-9)
    assert s.values[100] == pytest.approx(60.0, abs=1e-9)
    p = angle_series(session, Subject.RIGHT_ARM, Measure.PITCH)
    assert p.values[45] == pytest.approx(30.0, abs=1e-9)
