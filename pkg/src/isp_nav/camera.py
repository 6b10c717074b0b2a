"""Pinhole camera on a 2D ground plane, plus the synthetic segmenter.

World frame: X/Y metres, heading measured counter-clockwise from +X.
Camera frame: ``depth`` along the view axis (positive in front) and
``lateral`` positive to the camera's left.  Image columns grow to the right,
so a point on the left lands at a smaller column.  Pixel ``i`` spans
``[i, i + 1)`` and its centre is ``i + 0.5``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .field import RegionOfInterest

NEAR_PLANE = 0.01


class CameraError(ValueError):
    pass


def wrap_angle(a: float) -> float:
    """Normalise to (-pi, pi]."""
    a = math.remainder(a, math.tau)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_length: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not self.focal_length > 0:
            raise CameraError("focal_length must be > 0")
        if self.width < 1 or self.height < 1:
            raise CameraError("image dimensions must be >= 1")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise CameraError("principal point must lie inside the image")

    @classmethod
    def centered(cls, width, height, focal_length):
        return cls(float(focal_length), width / 2.0, height / 2.0, int(width), int(height))


@dataclass(frozen=True)
class CameraPose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class BodyBillboard:
    world_width: float
    world_height: float
    x: float = 0.0
    y: float = 0.0
    object_id: object = None

    def __post_init__(self):
        if not (self.world_width > 0 and self.world_height > 0):
            raise CameraError("billboard dimensions must be > 0")

    @property
    def circumradius(self) -> float:
        return math.hypot(self.world_width, self.world_height) / 2.0


def to_camera_frame(pose: CameraPose, point) -> tuple[float, float]:
    """Return ``(lateral, depth)`` of a world point."""
    dx, dy = point[0] - pose.x, point[1] - pose.y
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return -s * dx + c * dy, c * dx + s * dy


def project_scale(intrinsics: CameraIntrinsics, depth: float, world_extent: float) -> float:
    if depth <= 0:
        raise CameraError("object is behind the camera")
    return intrinsics.focal_length * world_extent / depth


def segment_scale(p1, p2, depth: float, focal_length: float = 1.0) -> float:
    """Image length of a segment lying in a plane parallel to the image."""
    if depth <= 0:
        raise CameraError("object is behind the camera")
    return focal_length * math.hypot(p2[0] - p1[0], p2[1] - p1[1]) / depth


def lateral_to_column(intrinsics: CameraIntrinsics, lateral: float, depth: float) -> float:
    """Continuous image x-coordinate of a camera-frame point."""
    return intrinsics.cx - intrinsics.focal_length * lateral / depth


@dataclass(frozen=True)
class Detection:
    roi: RegionOfInterest
    scale: float
    depth: float


def project_billboard(intrinsics: CameraIntrinsics, pose: CameraPose, body: BodyBillboard,
                      noise=None) -> Detection | None:
    """Project a camera-facing billboard and return its clipped ROI and scale.

    The scale is the larger side of the *unclipped* continuous box, so an object
    leaving the frame does not appear to shrink.  ``noise``, when given, is a
    zero-argument callable returning a pixel offset added to each box edge.
    """
    lateral, depth = to_camera_frame(pose, (body.x, body.y))
    if depth <= NEAR_PLANE:
        return None
    f = intrinsics.focal_length
    half_w = f * body.world_width / (2.0 * depth)
    half_h = f * body.world_height / (2.0 * depth)
    u = lateral_to_column(intrinsics, lateral, depth)
    left, right = u - half_w, u + half_w
    top, bottom = intrinsics.cy - half_h, intrinsics.cy + half_h
    if noise is not None:
        left, right = left + noise(), right + noise()
        top, bottom = top + noise(), bottom + noise()
        if right <= left or bottom <= top:
            return None
    scale = max(right - left, bottom - top)
    x0 = math.floor(left)
    x1 = max(math.ceil(right) - 1, x0)
    y0 = math.floor(top)
    y1 = max(math.ceil(bottom) - 1, y0)
    roi = RegionOfInterest(x0, y0, x1, y1).clip(intrinsics.width, intrinsics.height)
    if roi is None:
        return None
    return Detection(roi, scale, depth)


def column_to_angle(intrinsics: CameraIntrinsics, column: int) -> float:
    """Bearing of a column's centre ray, positive to the right of the axis."""
    if not 0 <= column < intrinsics.width:
        raise CameraError(f"column {column} outside [0, {intrinsics.width})")
    return math.atan((column + 0.5 - intrinsics.cx) / intrinsics.focal_length)


def angle_to_column(intrinsics: CameraIntrinsics, angle: float) -> int:
    if not -math.pi / 2 < angle < math.pi / 2:
        raise CameraError("angle outside the forward half-plane")
    col = math.floor(intrinsics.cx + intrinsics.focal_length * math.tan(angle))
    if not 0 <= col < intrinsics.width:
        raise CameraError(f"angle {angle} falls outside the image")
    return col
