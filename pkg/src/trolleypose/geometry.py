"""Camera model, trolley prior model, and ground-plane back-projection.

Coordinate conventions
----------------------
Camera frame (computer-vision standard): x right, y down, z forward.
``CameraModel.ground_normal`` is the unit normal of the ground plane in
camera coordinates pointing from the ground toward the sky; a level
camera has ``(0, -1, 0)``.  ``camera_height`` is the perpendicular
distance from the optical center down to the plane.

Ground frame (derived per camera): origin at the camera's foot point on
the plane, ``e1`` = camera x-axis projected into the plane, ``e2 = up x
e1`` (roughly "forward"), heights measured along the normal.  Planar
trolley poses (x, y, theta) live in this frame; theta is in degrees,
counterclockwise from ``e1``.

Back-projection intersects the pixel ray with the horizontal plane at
the keypoint's known height above the ground.  Rays within ``EPS_RAY``
of parallel to the plane cannot constrain depth and are rejected, as is
a keypoint at exactly camera height (the intersection collapses onto
the optical center).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .errors import (
    BehindCamera,
    ConfigError,
    DegenerateRay,
    InvisibleKeypoint,
    NoUsableKeypoints,
)

logger = logging.getLogger(__name__)

KEYPOINT_COUNT = 6

# |normal . ray| at or below this gives depth amplification beyond 1e6.
EPS_RAY = 1e-6


class Point3(NamedTuple):
    """Camera-frame point in meters."""

    x: float
    y: float
    z: float


class ModelKeypoint(NamedTuple):
    """One prior-model keypoint relative to the trolley's ground-contact center.

    ``offset_x``/``offset_y`` are planar offsets in the trolley's own frame at
    its reference heading; ``height`` is meters above the ground.
    """

    offset_x: float
    offset_y: float
    height: float


@dataclass(frozen=True)
class TrolleyModel:
    """Prior model: the six keypoints of the trolley, indexed 0..5."""

    keypoints: tuple[ModelKeypoint, ...]

    def __post_init__(self):
        kps = tuple(ModelKeypoint(*k) for k in self.keypoints)
        object.__setattr__(self, "keypoints", kps)
        if len(kps) != KEYPOINT_COUNT:
            raise ConfigError(
                "trolley.keypoints", f"expected {KEYPOINT_COUNT} keypoints, got {len(kps)}"
            )
        for i, kp in enumerate(kps):
            if not all(math.isfinite(v) for v in kp):
                raise ConfigError(f"trolley.keypoints[{i}]", "components must be finite")
            if kp.height < 0:
                raise ConfigError(
                    f"trolley.keypoints[{i}].height", f"must be >= 0, got {kp.height}"
                )


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera (zero skew) plus the ground plane it observes."""

    fx: float
    fy: float
    cx: float
    cy: float
    ground_normal: tuple[float, float, float]
    camera_height: float
    image_width: float
    image_height: float

    def __post_init__(self):
        object.__setattr__(self, "ground_normal", tuple(float(c) for c in self.ground_normal))
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError("camera.fx/fy", f"focal lengths must be > 0, got {self.fx}, {self.fy}")
        if len(self.ground_normal) != 3:
            raise ConfigError("camera.ground_normal", "must have 3 components")
        norm = math.sqrt(sum(c * c for c in self.ground_normal))
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError("camera.ground_normal", f"must be unit length, |n| = {norm}")
        if not self.camera_height > 0:
            raise ConfigError("camera.camera_height", f"must be > 0, got {self.camera_height}")
        if not (self.image_width > 0 and self.image_height > 0):
            raise ConfigError("camera.image_width/height", "must be > 0")


@dataclass(frozen=True)
class ImageKeypoint:
    """A detected (or synthesized) keypoint on the image plane, sub-pixel."""

    index: int
    u: float
    v: float
    visible: bool

    def __post_init__(self):
        # Coerce numpy scalars so downstream serialization stays plain JSON/CSV.
        object.__setattr__(self, "index", int(self.index))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "visible", bool(self.visible))
        if not 0 <= self.index < KEYPOINT_COUNT:
            raise ConfigError("keypoint.index", f"must be in 0..{KEYPOINT_COUNT - 1}, got {self.index}")


def ensure_valid_pairing(camera: CameraModel, model: TrolleyModel) -> None:
    """Reject camera/model pairs where no keypoint sits below the camera.

    With every keypoint at or above camera height, the trolley could present
    only horizon-parallel rays and back-projection would have nothing to work
    with; pipelines check this once at construction.
    """
    if all(kp.height >= camera.camera_height for kp in model.keypoints):
        raise ConfigError(
            "trolley.keypoints",
            "no keypoint height is below camera_height; depth is unobservable",
        )


# ---------------------------------------------------------------------------
# Ground-frame basis
# ---------------------------------------------------------------------------

def ground_basis(camera: CameraModel):
    """Orthonormal (e1, e2, up) with e1, e2 spanning the ground plane.

    e1 is the camera x-axis projected into the plane (falls back to the
    z-axis when the normal is nearly parallel to x); e2 = up x e1.
    """
    up = camera.ground_normal
    axis = (1.0, 0.0, 0.0)
    d = up[0]
    if abs(d) > 0.99:
        axis = (0.0, 0.0, 1.0)
        d = up[2]
    e1 = (axis[0] - d * up[0], axis[1] - d * up[1], axis[2] - d * up[2])
    n1 = math.sqrt(e1[0] ** 2 + e1[1] ** 2 + e1[2] ** 2)
    e1 = (e1[0] / n1, e1[1] / n1, e1[2] / n1)
    e2 = (
        up[1] * e1[2] - up[2] * e1[1],
        up[2] * e1[0] - up[0] * e1[2],
        up[0] * e1[1] - up[1] * e1[0],
    )
    return e1, e2, up


def ground_coords(camera: CameraModel, point: Point3) -> tuple[float, float, float]:
    """Camera-frame point -> (x, y, height) in the camera's ground frame."""
    e1, e2, up = ground_basis(camera)
    gx = e1[0] * point.x + e1[1] * point.y + e1[2] * point.z
    gy = e2[0] * point.x + e2[1] * point.y + e2[2] * point.z
    h = up[0] * point.x + up[1] * point.y + up[2] * point.z + camera.camera_height
    return gx, gy, h


def ground_to_camera(camera: CameraModel, gx: float, gy: float, height: float) -> Point3:
    """Inverse of :func:`ground_coords`."""
    e1, e2, up = ground_basis(camera)
    k = height - camera.camera_height
    return Point3(
        gx * e1[0] + gy * e2[0] + k * up[0],
        gx * e1[1] + gy * e2[1] + k * up[1],
        gx * e1[2] + gy * e2[2] + k * up[2],
    )


# ---------------------------------------------------------------------------
# Projection and back-projection
# ---------------------------------------------------------------------------

def ray_through_pixel(camera: CameraModel, u: float, v: float) -> Point3:
    """Direction of the viewing ray through pixel (u, v), z-normalized."""
    return Point3((u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0)


def backproject_keypoint(
    camera: CameraModel, kp: ImageKeypoint, keypoint_height: float
) -> Point3:
    """Recover a keypoint's 3D camera-frame position from its pixel.

    The pixel ray is scaled so the returned point lies at ``keypoint_height``
    above the ground plane: scale = |camera_height - keypoint_height| divided
    by |normal . ray|.

    Raises InvisibleKeypoint for non-visible input and DegenerateRay when the
    ray runs along the plane (or the keypoint sits exactly at camera height),
    since neither can constrain depth.
    """
    if not kp.visible:
        raise InvisibleKeypoint(f"keypoint {kp.index} is not visible")
    rho = ray_through_pixel(camera, kp.u, kp.v)
    n = camera.ground_normal
    denom = abs(n[0] * rho.x + n[1] * rho.y + n[2] * rho.z)
    if denom <= EPS_RAY:
        raise DegenerateRay(
            f"keypoint {kp.index}: ray nearly parallel to ground (|n.rho| = {denom:.3e})"
        )
    if keypoint_height == camera.camera_height:
        raise DegenerateRay(
            f"keypoint {kp.index}: height equals camera height; intersection collapses"
        )
    scale = abs(camera.camera_height - keypoint_height) / denom
    return Point3(scale * rho.x, scale * rho.y, scale * rho.z)


def project_keypoint(camera: CameraModel, point: Point3, index: int = 0) -> ImageKeypoint:
    """Forward pinhole projection; the exact inverse of back-projection.

    The visible flag is set iff (u, v) lands within the image bounds.
    """
    if point.z <= 0:
        raise BehindCamera(f"point has non-positive depth z = {point.z}")
    u = camera.fx * point.x / point.z + camera.cx
    v = camera.fy * point.y / point.z + camera.cy
    visible = 0.0 <= u <= camera.image_width and 0.0 <= v <= camera.image_height
    return ImageKeypoint(index=index, u=u, v=v, visible=visible)


def visible_backprojections(
    camera: CameraModel, model: TrolleyModel, observations: Sequence[ImageKeypoint]
) -> list[tuple[ImageKeypoint, Point3]]:
    """Back-project every usable observation; skip invisible/degenerate ones."""
    out = []
    for kp in observations:
        if not kp.visible:
            continue
        if not (0.0 <= kp.u <= camera.image_width and 0.0 <= kp.v <= camera.image_height):
            logger.debug("keypoint %d at (%.1f, %.1f) is outside image bounds", kp.index, kp.u, kp.v)
        try:
            point = backproject_keypoint(camera, kp, model.keypoints[kp.index].height)
        except DegenerateRay as exc:
            logger.debug("skipping keypoint %d: %s", kp.index, exc)
            continue
        out.append((kp, point))
    return out


def center_from_backprojections(
    camera: CameraModel,
    model: TrolleyModel,
    backprojections: Sequence[tuple[ImageKeypoint, Point3]],
    orientation: Optional[float] = None,
) -> Point3:
    """Average the per-keypoint center estimates given back-projected points.

    Each keypoint votes ``X_i - Y_i`` where ``Y_i`` is its prior-model offset
    expressed in camera coordinates through the ground basis.  With
    ``orientation`` (radians, trolley heading in the ground frame) the planar
    offsets are rotated to the actual heading first; without it they are
    subtracted unrotated, which is only exact at the reference heading.
    """
    e1, e2, up = ground_basis(camera)
    if orientation is None:
        c, s = 1.0, 0.0
    else:
        c, s = math.cos(orientation), math.sin(orientation)
    sx = sy = sz = 0.0
    for kp, point in backprojections:
        mk = model.keypoints[kp.index]
        rx = mk.offset_x * c - mk.offset_y * s
        ry = mk.offset_x * s + mk.offset_y * c
        sx += point.x - (rx * e1[0] + ry * e2[0] + mk.height * up[0])
        sy += point.y - (rx * e1[1] + ry * e2[1] + mk.height * up[1])
        sz += point.z - (rx * e1[2] + ry * e2[2] + mk.height * up[2])
    n = len(backprojections)
    return Point3(sx / n, sy / n, sz / n)


def estimate_center(
    camera: CameraModel,
    model: TrolleyModel,
    observations: Sequence[ImageKeypoint],
    orientation: Optional[float] = None,
) -> Point3:
    """Estimate the trolley's ground-contact center from visible keypoints.

    ``orientation`` is the trolley heading in radians; when given, model
    offsets are rotated to that heading before subtraction (the corrected
    mode), otherwise they are used as-is.  A single well-detected keypoint is
    enough for an exact answer in corrected mode.

    Raises NoUsableKeypoints when every observation is invisible or
    degenerate.
    """
    pts = visible_backprojections(camera, model, observations)
    if not pts:
        raise NoUsableKeypoints("no visible, non-degenerate keypoint in frame")
    return center_from_backprojections(camera, model, pts, orientation)
