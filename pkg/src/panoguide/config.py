"""Pipeline configuration: every tunable threshold in one auditable place.

Values can be loaded from a nested JSON file and overridden per-key with
dotted paths (``segmentation.enter_hysteresis_deg=12``), which is how the
CLI applies ``--set`` flags.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class LoaderConfig:
    # a single low-confidence joint poisons a vector, so the whole group drops
    confidence_floor: float = 0.5


@dataclass
class KinematicsConfig:
    right_arm_endpoint: str = "finger"  # "finger" or "wrist"
    marker_lookback_frames: int = 15
    smoothing_window: int = 5


@dataclass
class SegmentationConfig:
    rest_percentile: float = 20.0
    rest_band_deg: float | None = None  # explicit rest level; percentile estimate when None
    enter_hysteresis_deg: float = 10.0
    retract_drop_deg: float = 15.0
    min_epoch_frames: int = 6


@dataclass
class TriggerConfig:
    turn_threshold_deg: float = 60.0
    sustain_frames: int = 5
    rearm_hysteresis_deg: float = 5.0


@dataclass
class StatusConfig:
    # explicit splits bypass the 3-means fit; both None means fit from data
    low_high_split: float | None = None
    mid_high_split: float | None = None


@dataclass
class HapticsConfig:
    velocity_percentiles: tuple[float, float] = (5.0, 95.0)
    amplitude_yaw_min_deg: float = 90.0
    amplitude_yaw_max_deg: float = 150.0
    amplitude_floor: float = 0.2
    merge_frequency_hz: float = 10.0
    merge_amplitude: float = 0.05
    left_frequency_hz: float = 120.0
    left_sustain_frames: int = 3
    left_excursion_full_scale_deg: float = 20.0
    band_margin_deg: float = 5.0
    band_percentiles: tuple[float, float] = (5.0, 95.0)
    min_calibration_seconds: float = 2.0
    # fallback velocity endpoints when a session has no epochs to calibrate on
    fallback_v_min_deg_s: float = 10.0
    fallback_v_max_deg_s: float = 200.0


@dataclass
class CueConfig:
    lead_frames: int = 15
    arc_radius_px: float = 40.0
    mask_pad_px: float = 20.0
    trigger_cue_frames: int = 30
    # relaxed hanging forearm, (finger, wrist, elbow) relative to the elbow,
    # image y pointing down
    relaxed_arm_template: tuple[tuple[float, float], ...] = (
        (10.0, 95.0),
        (5.0, 55.0),
        (0.0, 0.0),
    )


@dataclass
class ScoringConfig:
    match_window_frames: int = 45
    weight_yaw: float = 0.4
    weight_pitch: float = 0.2
    weight_timing: float = 0.2
    weight_velocity: float = 0.2
    yaw_norm_deg: float = 30.0
    pitch_norm_deg: float = 30.0
    timing_norm_ms: float = 1000.0
    finalize_latency_frames: int = 15


@dataclass
class AnalyticsConfig:
    angle_bin_width_deg: float = 3.0
    angle_range: tuple[float, float] = (0.0, 180.0)
    velocity_bin_width_deg_s: float = 20.0
    velocity_range: tuple[float, float] = (0.0, 600.0)


@dataclass
class PipelineConfig:
    loader: LoaderConfig = field(default_factory=LoaderConfig)
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    triggers: TriggerConfig = field(default_factory=TriggerConfig)
    status: StatusConfig = field(default_factory=StatusConfig)
    haptics: HapticsConfig = field(default_factory=HapticsConfig)
    cues: CueConfig = field(default_factory=CueConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    analytics: AnalyticsConfig = field(default_factory=AnalyticsConfig)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        cfg = cls()
        _apply_nested(cfg, data)
        return cfg

    def apply_override(self, dotted_key: str, raw_value: str) -> None:
        """Set one value by dotted path, parsing the string as JSON when possible."""
        parts = dotted_key.split(".")
        target: Any = self
        for part in parts[:-1]:
            if not hasattr(target, part):
                raise KeyError(f"unknown config section {part!r} in {dotted_key!r}")
            target = getattr(target, part)
        leaf = parts[-1]
        if not hasattr(target, leaf):
            raise KeyError(f"unknown config key {dotted_key!r}")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        current = getattr(target, leaf)
        if isinstance(current, tuple) and isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        setattr(target, leaf, value)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _apply_nested(target: Any, data: dict) -> None:
    for key, value in data.items():
        if not hasattr(target, key):
            raise KeyError(f"unknown config key {key!r}")
        current = getattr(target, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            _apply_nested(current, value)
        else:
            if isinstance(current, tuple) and isinstance(value, list):
                value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            setattr(target, key, value)
