"""Statistical artifacts: angle histograms, command counts, distribution
reports.

All angle histograms are built from raw (unsmoothed) angles sampled at
epoch peak frames; smoothing exists for detection only and never reaches a
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .commands import CommandCategory, DogStatusCategory
from .kinematics import Measure, Subject

if TYPE_CHECKING:  # pragma: no cover
    from .analysis import SessionAnalysis


@dataclass
class Histogram:
    """Half-open binning: a value on a bin's upper edge falls into the
    next bin.  Out-of-range values land in the nearest edge bin and are
    also reported via ``underflow``/``overflow``.
    """

    bin_width: float
    lo: float
    hi: float
    counts: list[int]
    n: int
    underflow: int = 0
    overflow: int = 0

    def to_json_dict(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "lo": self.lo,
            "hi": self.hi,
            "counts": list(self.counts),
            "n": self.n,
            "underflow": self.underflow,
            "overflow": self.overflow,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Histogram":
        return cls(
            bin_width=float(data["bin_width"]),
            lo=float(data["lo"]),
            hi=float(data["hi"]),
            counts=[int(c) for c in data["counts"]],
            n=int(data["n"]),
            underflow=int(data.get("underflow", 0)),
            overflow=int(data.get("overflow", 0)),
        )


def histogram(
    values, bin_width: float = 3.0, value_range: tuple[float, float] = (0.0, 180.0)
) -> Histogram:
    """Histogram with half-open bins [lo + k*w, lo + (k+1)*w).

    Empty input is allowed (an all-zero histogram); counts always
    conserve: sum(counts) == n.
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    lo, hi = value_range
    if hi <= lo:
        raise ValueError(f"need hi > lo, got ({lo}, {hi})")
    bins = int(math.ceil((hi - lo) / bin_width))
    counts = [0] * bins
    n = underflow = overflow = 0
    for v in values:
        v = float(v)
        if math.isnan(v):
            continue
        n += 1
        idx = int(math.floor((v - lo) / bin_width))
        if idx < 0:
            underflow += 1
            idx = 0
        elif idx >= bins:
            overflow += 1
            idx = bins - 1
        counts[idx] += 1
    return Histogram(
        bin_width=bin_width, lo=lo, hi=hi, counts=counts, n=n,
        underflow=underflow, overflow=overflow,
    )


@dataclass
class SessionReport:
    dataset_name: str
    session_id: str
    command_count: int
    head_angle_hist: Histogram
    body_angle_hist: Histogram
    yaw_hist: Histogram
    pitch_hist: Histogram
    velocity_hist: Histogram
    category_counts: dict[str, int] = field(default_factory=dict)
    status_counts: dict[str, int] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "session_id": self.session_id,
            "command_count": self.command_count,
            "head_angle_hist": self.head_angle_hist.to_json_dict(),
            "body_angle_hist": self.body_angle_hist.to_json_dict(),
            "yaw_hist": self.yaw_hist.to_json_dict(),
            "pitch_hist": self.pitch_hist.to_json_dict(),
            "velocity_hist": self.velocity_hist.to_json_dict(),
            "category_counts": dict(self.category_counts),
            "status_counts": dict(self.status_counts),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SessionReport":
        return cls(
            dataset_name=data["dataset_name"],
            session_id=data["session_id"],
            command_count=int(data["command_count"]),
            head_angle_hist=Histogram.from_json_dict(data["head_angle_hist"]),
            body_angle_hist=Histogram.from_json_dict(data["body_angle_hist"]),
            yaw_hist=Histogram.from_json_dict(data["yaw_hist"]),
            pitch_hist=Histogram.from_json_dict(data["pitch_hist"]),
            velocity_hist=Histogram.from_json_dict(data["velocity_hist"]),
            category_counts={k: int(v) for k, v in data["category_counts"].items()},
            status_counts={k: int(v) for k, v in data["status_counts"].items()},
        )


def session_report(analysis: "SessionAnalysis") -> SessionReport:
    """Distribution report for one analyzed session.

    Deterministic: the same session and configuration always produce a
    bit-identical report.
    """
    cfg = analysis.config.analytics
    manifest = analysis.session.manifest
    epochs = analysis.epochs
    peaks = [e.peak_frame for e in epochs]

    head_raw = analysis.raw_series[(Subject.DOG_HEAD, Measure.YAW)].values
    body_raw = analysis.raw_series[(Subject.DOG_BACK, Measure.YAW)].values
    head_at_peaks = [head_raw[f] for f in peaks]
    body_at_peaks = [body_raw[f] for f in peaks]
    yaw_at_peaks = [e.peak_angles.yaw_deg for e in epochs if e.peak_angles is not None]
    pitch_at_peaks = [e.peak_angles.pitch_deg for e in epochs if e.peak_angles is not None]

    speeds: list[float] = []
    for e in epochs:
        chunk = analysis.right_velocity.values[e.start_frame : e.end_frame + 1]
        speeds.extend(float(abs(v)) for v in chunk if not np.isnan(v))

    category_counts = {c.value: 0 for c in CommandCategory}
    for e in epochs:
        if e.category is not None:
            category_counts[e.category.value] += 1
    status_counts = {s.value: 0 for s in DogStatusCategory}
    for e in epochs:
        if e.dog_status_at_peak is not None:
            status_counts[e.dog_status_at_peak.value] += 1

    angle_hist = lambda vals: histogram(vals, cfg.angle_bin_width_deg, cfg.angle_range)
    return SessionReport(
        dataset_name=manifest.dataset_name,
        session_id=manifest.session_id,
        command_count=len(epochs),
        head_angle_hist=angle_hist(head_at_peaks),
        body_angle_hist=angle_hist(body_at_peaks),
        yaw_hist=angle_hist(yaw_at_peaks),
        pitch_hist=angle_hist(pitch_at_peaks),
        velocity_hist=histogram(speeds, cfg.velocity_bin_width_deg_s, cfg.velocity_range),
        category_counts=category_counts,
        status_counts=status_counts,
    )


def render_report(report: SessionReport, bar_width: int = 40) -> str:
    """Plain-text rendering of a report for terminal display."""
    lines = [
        f"dataset: {report.dataset_name}  session: {report.session_id}",
        f"command_count: {report.command_count}",
        "category_counts:",
    ]
    for name, count in report.category_counts.items():
        lines.append(f"  {name:<24} {count}")
    lines.append("status_counts:")
    for name, count in report.status_counts.items():
        lines.append(f"  {name:<24} {count}")
    for title, hist in (
        ("head angle at command peaks (deg)", report.head_angle_hist),
        ("body angle at command peaks (deg)", report.body_angle_hist),
        ("command yaw at peaks (deg)", report.yaw_hist),
        ("command pitch at peaks (deg)", report.pitch_hist),
        ("in-command angular speed (deg/s)", report.velocity_hist),
    ):
        lines.append(f"{title}: n={hist.n}")
        peak = max(hist.counts) if hist.counts else 0
        if peak == 0:
            continue
        for k, count in enumerate(hist.counts):
            if count == 0:
                continue
            lo = hist.lo + k * hist.bin_width
            bar = "#" * max(1, int(round(bar_width * count / peak)))
            lines.append(f"  [{lo:7.1f}, {lo + hist.bin_width:7.1f})  {count:5d} {bar}")
    return "\n".join(lines)
