"""Spherical/planar projection math and the dot-product angle kernel.

Conventions used throughout:

* Perspective frames are rectilinear (gnomonic) extractions from an
  equirectangular panorama, with square pixels and a symmetric field of
  view, so the focal length is ``(out_width / 2) / tan(fov / 2)``.
* Image y points down.  Longitude grows to the right of the view axis,
  latitude grows upward, so the pixel row above the centre maps to a
  positive latitude offset.
* Angles measured in image space are relative indicators, not physical
  angles: the capture rig sits above and to the side of the scene.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCamera,
    DegenerateMarker,
    DegenerateVector,
    OutOfFov,
    OutOfFrame,
)

_NORM_EPS = 1e-12
_EDGE_EPS = 1e-9

Vec2 = tuple[float, float]


@dataclass(frozen=True)
class ViewParams:
    """Placement of a perspective view on the panorama sphere."""

    theta_deg: float  # view longitude
    phi_deg: float  # view latitude
    fov_deg: float
    out_width: int = 640
    out_height: int = 640
    pano_width: int = 3840
    pano_height: int = 1920

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError(f"fov_deg must be in (0, 180), got {self.fov_deg}")
        if not -180.0 <= self.theta_deg <= 180.0:
            raise ValueError(f"theta_deg must be in [-180, 180], got {self.theta_deg}")
        if not -90.0 <= self.phi_deg <= 90.0:
            raise ValueError(f"phi_deg must be in [-90, 90], got {self.phi_deg}")

    @property
    def focal_px(self) -> float:
        return (self.out_width / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)


@dataclass(frozen=True)
class AxesFrame:
    """Marker-derived reference directions, both unit-norm, in image coords."""

    horizontal: Vec2
    gravity: Vec2


def angle_between(u, v) -> float:
    """Angle between two 2-D vectors in degrees, in [0, 180].

    Symmetric in its arguments and invariant under positive scaling; the
    cosine is clamped to [-1, 1] so parallel vectors are exact.

    Raises:
        DegenerateVector: if either vector has norm below 1e-12.
    """
    ux, uy = float(u[0]), float(u[1])
    vx, vy = float(v[0]), float(v[1])
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu < _NORM_EPS or nv < _NORM_EPS:
        raise DegenerateVector(f"vector norm below {_NORM_EPS}")
    c = (ux * vx + uy * vy) / (nu * nv)
    c = max(-1.0, min(1.0, c))
    return math.degrees(math.acos(c))


def _view_rotation(view: ViewParams) -> np.ndarray:
    """World-from-camera rotation: yaw by theta about +y, pitch by phi."""
    t = math.radians(view.theta_deg)
    p = math.radians(view.phi_deg)
    ry = np.array(
        [
            [math.cos(t), 0.0, math.sin(t)],
            [0.0, 1.0, 0.0],
            [-math.sin(t), 0.0, math.cos(t)],
        ]
    )
    # rotation about +x chosen so the optical axis lands at latitude +phi
    rx = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, math.cos(p), math.sin(p)],
            [0.0, -math.sin(p), math.cos(p)],
        ]
    )
    return ry @ rx


def perspective_to_sphere(px: float, py: float, view: ViewParams) -> tuple[float, float]:
    """Un-project a perspective-frame pixel to spherical (lon_deg, lat_deg).

    The centre pixel maps exactly to ``(view.theta_deg, view.phi_deg)``.

    Raises:
        OutOfFrame: if (px, py) lies outside the output frame.
    """
    if not (0.0 <= px <= view.out_width and 0.0 <= py <= view.out_height):
        raise OutOfFrame(f"pixel ({px}, {py}) outside {view.out_width}x{view.out_height} frame")
    f = view.focal_px
    ray = np.array(
        [
            (px - view.out_width / 2.0) / f,
            -(py - view.out_height / 2.0) / f,  # image y down -> camera y up
            1.0,
        ]
    )
    w = _view_rotation(view) @ ray
    w = w / np.linalg.norm(w)
    lon = math.degrees(math.atan2(w[0], w[2]))
    lat = math.degrees(math.asin(max(-1.0, min(1.0, w[1]))))
    return lon, lat


def sphere_to_perspective(lon_deg: float, lat_deg: float, view: ViewParams) -> tuple[float, float]:
    """Project a spherical direction onto the perspective frame; inverse of
    :func:`perspective_to_sphere`.

    Raises:
        BehindCamera: if the direction points away from the view axis.
        OutOfFov: if the projection lands outside the output frame.
    """
    lo = math.radians(lon_deg)
    la = math.radians(lat_deg)
    d = np.array(
        [
            math.sin(lo) * math.cos(la),
            math.sin(la),
            math.cos(lo) * math.cos(la),
        ]
    )
    c = _view_rotation(view).T @ d
    if c[2] <= _NORM_EPS:
        raise BehindCamera(f"direction ({lon_deg}, {lat_deg}) behind the view plane")
    f = view.focal_px
    px = view.out_width / 2.0 + f * c[0] / c[2]
    py = view.out_height / 2.0 - f * c[1] / c[2]
    if not (0.0 <= px <= view.out_width and 0.0 <= py <= view.out_height):
        raise OutOfFov(f"direction ({lon_deg}, {lat_deg}) projects outside the frame")
    return px, py


def sphere_to_equirect(
    lon_deg: float, lat_deg: float, pano_width: int, pano_height: int
) -> tuple[float, float]:
    """Spherical direction to equirectangular pixel, linear in lon/lat."""
    ex = (lon_deg + 180.0) / 360.0 * pano_width
    ey = (90.0 - lat_deg) / 180.0 * pano_height
    return ex, ey


def marker_axes(corners) -> AxesFrame:
    """Derive the horizontal and gravity axes from four marker corners.

    ``corners`` is the fixed order (top-left, top-right, bottom-right,
    bottom-left).  The horizontal axis averages the top and bottom edges
    (left to right); gravity averages the left and right edges (top to
    bottom).  Averaging makes the result insensitive to mild perspective
    skew of the marker.

    Raises:
        DegenerateMarker: if any marker edge, or an averaged axis, has
            norm below 1e-9.
    """
    tl, tr, br, bl = [np.asarray(c, dtype=float)[:2] for c in corners]
    top = tr - tl
    bottom = br - bl
    left = bl - tl
    right = br - tr
    for name, edge in (("top", top), ("right", right), ("bottom", bottom), ("left", left)):
        if np.linalg.norm(edge) < _EDGE_EPS:
            raise DegenerateMarker(f"{name} edge degenerate")
    h = (top + bottom) / 2.0
    g = (left + right) / 2.0
    hn = np.linalg.norm(h)
    gn = np.linalg.norm(g)
    if hn < _EDGE_EPS or gn < _EDGE_EPS:
        raise DegenerateMarker("averaged axis degenerate")
    h = h / hn
    g = g / gn
    return AxesFrame(horizontal=(float(h[0]), float(h[1])), gravity=(float(g[0]), float(g[1])))
