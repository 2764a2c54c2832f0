"""Per-frame overlay primitives for the four auxiliary-information modes.

Overlays are semantic, resolution-independent primitives; the client maps
``style_tag`` to colors and stroke widths.  Mode A is by construction the
union of the command-cue family (mode B) and the dog-cue family (mode C);
mode D replaces the expert right arm with a mask and a relaxed-arm figure
and never leaks category information.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from .commands import category_band, classify_dog_status, status_band
from .config import CueConfig
from .errors import AnalysisMissing, ArmAbsent
from .kinematics import Measure, Subject
from .session import ArmKeypoints

if TYPE_CHECKING:  # pragma: no cover
    from .analysis import SessionAnalysis

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    A_BOTH = "A"
    B_COMMAND_ONLY = "B"
    C_DOG_ONLY = "C"
    D_EVALUATION = "D"


class OverlayKind(enum.Enum):
    POINT_SET = "PointSet"
    SEGMENT = "Segment"
    ANGLE_ARC = "AngleArc"
    MASK_REGION = "MaskRegion"
    LABEL = "Label"


@dataclass(frozen=True)
class OverlaySpec:
    """One drawable primitive in perspective-frame pixel coordinates."""

    kind: OverlayKind
    points: tuple[tuple[float, float], ...]
    style_tag: str
    text: str | None = None
    radius: float | None = None
    from_deg: float | None = None
    to_deg: float | None = None

    def to_json_dict(self) -> dict:
        out: dict[str, Any] = {
            "kind": self.kind.value,
            "style_tag": self.style_tag,
            "points": [[x, y] for x, y in self.points],
        }
        if self.text is not None:
            out["text"] = self.text
        if self.radius is not None:
            out["radius"] = self.radius
            out["from_deg"] = self.from_deg
            out["to_deg"] = self.to_deg
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "OverlaySpec":
        return cls(
            kind=OverlayKind(data["kind"]),
            points=tuple((float(x), float(y)) for x, y in data["points"]),
            style_tag=data["style_tag"],
            text=data.get("text"),
            radius=data.get("radius"),
            from_deg=data.get("from_deg"),
            to_deg=data.get("to_deg"),
        )


def _clip(points, width: float, height: float) -> tuple[tuple[float, float], ...]:
    return tuple(
        (min(max(float(x), 0.0), width), min(max(float(y), 0.0), height)) for x, y in points
    )


def mask_right_arm(
    frame_index: int,
    right_arm: ArmKeypoints | None,
    relaxed_template,
    pad_px: float = 20.0,
    frame_width: float = 640.0,
    frame_height: float = 640.0,
) -> list[OverlaySpec]:
    """Occluder over the expert right arm plus the relaxed-arm figure.

    The mask is the convex hull of the three arm joints pushed outward
    from its centroid by ``pad_px``; the relaxed template is translated so
    its elbow lands on the current elbow.

    Raises:
        ArmAbsent: no right arm in this frame.
    """
    if right_arm is None:
        raise ArmAbsent(f"frame {frame_index} has no right arm to mask")
    pts = [(p.x, p.y) for p in right_arm.points]
    cx = sum(x for x, _ in pts) / 3.0
    cy = sum(y for _, y in pts) / 3.0

    cross = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (
        pts[1][1] - pts[0][1]
    ) * (pts[2][0] - pts[0][0])
    if abs(cross) < 1e-9:
        # collinear joints: fall back to a padded bounding box
        xs = [x for x, _ in pts]
        ys = [y for _, y in pts]
        hull = [
            (min(xs) - pad_px, min(ys) - pad_px),
            (max(xs) + pad_px, min(ys) - pad_px),
            (max(xs) + pad_px, max(ys) + pad_px),
            (min(xs) - pad_px, max(ys) + pad_px),
        ]
    else:
        ordered = pts if cross > 0 else [pts[0], pts[2], pts[1]]
        hull = []
        for x, y in ordered:
            dx, dy = x - cx, y - cy
            norm = (dx * dx + dy * dy) ** 0.5
            if norm < 1e-9:
                hull.append((x, y))
            else:
                hull.append((x + pad_px * dx / norm, y + pad_px * dy / norm))

    elbow = right_arm.points[2]
    template = [
        (elbow.x + tx - relaxed_template[2][0], elbow.y + ty - relaxed_template[2][1])
        for tx, ty in relaxed_template
    ]
    return [
        OverlaySpec(
            kind=OverlayKind.MASK_REGION,
            points=_clip(hull, frame_width, frame_height),
            style_tag="relaxed-arm-mask",
        ),
        OverlaySpec(
            kind=OverlayKind.SEGMENT,
            points=_clip(template, frame_width, frame_height),
            style_tag="relaxed-arm",
        ),
    ]


def _command_cues(frame_index: int, analysis: "SessionAnalysis", cfg: CueConfig,
                  width: float, height: float) -> list[OverlaySpec]:
    epoch = analysis.epoch_at(frame_index, lead_frames=cfg.lead_frames)
    if epoch is None:
        return []
    record = analysis.session.frame_at(epoch.peak_frame)
    if record is None or record.right_arm is None:
        return []
    arm_pts = tuple((p.x, p.y) for p in record.right_arm.points)
    elbow = arm_pts[2]
    out = [
        OverlaySpec(
            kind=OverlayKind.POINT_SET,
            points=_clip(arm_pts, width, height),
            style_tag="standard-pose",
        ),
        OverlaySpec(
            kind=OverlayKind.SEGMENT,
            points=_clip(arm_pts, width, height),
            style_tag="standard-pose",
        ),
    ]
    if epoch.category is not None:
        out.append(
            OverlaySpec(
                kind=OverlayKind.LABEL,
                points=_clip([elbow], width, height),
                style_tag="command-category",
                text=epoch.category.value,
            )
        )
        band = category_band(epoch.category)
        if band is not None:
            out.append(
                OverlaySpec(
                    kind=OverlayKind.ANGLE_ARC,
                    points=_clip([elbow], width, height),
                    style_tag="command-range",
                    radius=cfg.arc_radius_px,
                    from_deg=band[0],
                    to_deg=band[1],
                )
            )
    return out


def _dog_cues(frame_index: int, analysis: "SessionAnalysis", cfg: CueConfig,
              width: float, height: float) -> list[OverlaySpec]:
    active = analysis.triggers_at(frame_index, cfg.trigger_cue_frames)
    if not active:
        return []
    out: list[OverlaySpec] = []
    record = analysis.session.frame_at(frame_index)
    dog = record.dog if record is not None else None
    head_series = analysis.smoothed_head.values
    for trigger in active:
        head_angle = trigger.head_angle_deg
        v = head_series[frame_index]
        if v == v:  # not NaN
            head_angle = float(v)
        anchor: tuple[float, float] | None = None
        if dog is not None:
            head_pts = tuple((p.x, p.y) for p in (*dog.ears, dog.neck))
            anchor = (dog.neck.x, dog.neck.y)
            out.append(
                OverlaySpec(
                    kind=OverlayKind.POINT_SET,
                    points=_clip(head_pts, width, height),
                    style_tag="dog-head",
                )
            )
        if analysis.status_thresholds is not None:
            status = classify_dog_status(head_angle, analysis.status_thresholds)
            label_anchor = anchor or (width / 2.0, height / 2.0)
            out.append(
                OverlaySpec(
                    kind=OverlayKind.LABEL,
                    points=_clip([label_anchor], width, height),
                    style_tag="dog-status",
                    text=status.value,
                )
            )
            if anchor is not None:
                lo, hi = status_band(status, analysis.status_thresholds)
                out.append(
                    OverlaySpec(
                        kind=OverlayKind.ANGLE_ARC,
                        points=_clip([anchor], width, height),
                        style_tag="dog-status-range",
                        radius=cfg.arc_radius_px,
                        from_deg=lo,
                        to_deg=hi,
                    )
                )
    return out


def _mask_cues(frame_index: int, analysis: "SessionAnalysis", cfg: CueConfig,
               width: float, height: float) -> list[OverlaySpec]:
    record = analysis.session.frame_at(frame_index)
    arm = record.right_arm if record is not None else None
    try:
        return mask_right_arm(
            frame_index, arm, cfg.relaxed_arm_template, cfg.mask_pad_px, width, height
        )
    except ArmAbsent:
        log.debug("frame %d: right arm absent, no mask emitted", frame_index)
        return []


def build_overlays(
    frame_index: int,
    mode: Mode,
    analysis: "SessionAnalysis",
    practice=None,
) -> list[OverlaySpec]:
    """Overlay primitives for one frame under the given mode.

    ``practice`` may be a PracticePose or bare ArmKeypoints; when present,
    every mode appends the practice-pose segment.

    Raises:
        AnalysisMissing: analysis is None.
    """
    if analysis is None:
        raise AnalysisMissing("build_overlays needs a computed session analysis")
    cfg = analysis.config.cues
    width = float(analysis.session.manifest.frame_width)
    height = float(analysis.session.manifest.frame_height)

    out: list[OverlaySpec] = []
    if mode in (Mode.A_BOTH, Mode.B_COMMAND_ONLY):
        out.extend(_command_cues(frame_index, analysis, cfg, width, height))
    if mode in (Mode.A_BOTH, Mode.C_DOG_ONLY):
        out.extend(_dog_cues(frame_index, analysis, cfg, width, height))
    if mode is Mode.D_EVALUATION:
        out.extend(_mask_cues(frame_index, analysis, cfg, width, height))

    if practice is not None:
        arm = getattr(practice, "right_arm", practice)
        if arm is not None:
            out.append(
                OverlaySpec(
                    kind=OverlayKind.SEGMENT,
                    points=_clip([(p.x, p.y) for p in arm.points], width, height),
                    style_tag="practice-pose",
                )
            )
    return out
