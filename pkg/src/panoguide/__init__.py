"""Pose analytics, command classification, cue overlays, haptic synthesis
and replay streaming for 360-degree guide-dog training sessions."""

from .analysis import SessionAnalysis, analyze_session
from .analytics import Histogram, SessionReport, histogram, session_report
from .commands import (
    CommandCategory,
    CommandEpoch,
    DogStatusCategory,
    StatusThresholds,
    TriggerEvent,
    classify_command,
    classify_dog_status,
    detect_head_turn_triggers,
    fit_status_thresholds,
    max_extension_frame,
    segment_commands,
)
from .config import PipelineConfig
from .cues import Mode, OverlayKind, OverlaySpec, build_overlays, mask_right_arm
from .fixtures import FixtureSpec, PlantedEpoch, dataset_fixture_specs, generate, write_fixture
from .geometry import (
    AxesFrame,
    ViewParams,
    angle_between,
    marker_axes,
    perspective_to_sphere,
    sphere_to_equirect,
    sphere_to_perspective,
)
from .haptics import (
    Hand,
    HapticCalibration,
    HapticEvent,
    WalkingBand,
    amplitude_from_angle,
    estimate_walking_band,
    frequency_from_velocity,
    left_hand_alerts,
    synthesize_haptic_track,
)
from .kinematics import (
    AngleSeries,
    Measure,
    PoseAngles,
    Subject,
    VelocitySeries,
    angle_series,
    angular_velocity,
    arm_vector,
    dog_back_vector,
    dog_head_vector,
    pose_angles,
    smooth_series,
)
from .scoring import (
    LiveAnnotator,
    PracticePose,
    PracticeScore,
    PracticeScorer,
    match_epochs,
    score_practice,
    score_session,
)
from .session import (
    ArmKeypoints,
    DogKeypoints,
    FrameRecord,
    Keypoint,
    MarkerFrame,
    Session,
    SessionManifest,
    load_session,
    save_derived,
    validate_frame,
)

__version__ = "0.1.0"
