"""Per-frame fusion of keypoints and orientation into a filtered pose.

``process_frame`` is the end-to-end step: decode the heading from the
frame's orientation distribution, estimate the trolley center from the
usable keypoints (rotating model offsets by the decoded heading in the
default orientation-corrected mode), then push the resulting planar pose
through the moving-average filter.  Frames with no usable keypoint reuse
the filter's last output, flagged degraded, without feeding the window —
history is never polluted with fabricated observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import BinCountMismatch, ColdStartNoObservation, ConfigError, NoUsableKeypoints
from .filtering import FilterParams, FilterState, PoseObservation, current_estimate, mark_stale, update
from .geometry import (
    KEYPOINT_COUNT,
    CameraModel,
    ImageKeypoint,
    TrolleyModel,
    center_from_backprojections,
    ensure_valid_pairing,
    ground_coords,
    visible_backprojections,
)
from .orientation import OrientationDistribution, decode_orientation

CENTER_MODES = ("paper-literal", "orientation-corrected")


@dataclass(frozen=True)
class DetectionFrame:
    """One frame's detector output: six keypoint slots plus an orientation distribution."""

    frame_id: int
    keypoints: tuple[ImageKeypoint, ...]
    orientation: OrientationDistribution
    timestamp: Optional[float] = None

    def __post_init__(self):
        kps = tuple(self.keypoints)
        object.__setattr__(self, "keypoints", kps)
        if len(kps) != KEYPOINT_COUNT:
            raise ConfigError("frame.keypoints", f"expected {KEYPOINT_COUNT} keypoints, got {len(kps)}")
        for slot, kp in enumerate(kps):
            if kp.index != slot:
                raise ConfigError(
                    f"frame.keypoints[{slot}]", f"keypoint index {kp.index} does not match its slot"
                )


@dataclass(frozen=True)
class PipelineConfig:
    """Static configuration shared by every frame of a track."""

    camera: CameraModel
    model: TrolleyModel
    filter_params: FilterParams = field(default_factory=FilterParams)
    center_mode: str = "orientation-corrected"
    bin_count: int = 360
    max_degraded_gap: int = 30

    def __post_init__(self):
        if self.center_mode not in CENTER_MODES:
            raise ConfigError("center_mode", f"must be one of {CENTER_MODES}, got {self.center_mode!r}")
        if self.bin_count < 2:
            raise ConfigError("bin_count", f"must be >= 2, got {self.bin_count}")
        if self.max_degraded_gap < 0:
            raise ConfigError("max_degraded_gap", f"must be >= 0, got {self.max_degraded_gap}")
        ensure_valid_pairing(self.camera, self.model)


@dataclass(frozen=True)
class PoseEstimate:
    """Filtered planar pose in the camera's ground frame.

    ``degraded`` marks estimates served from history (no usable keypoint) or
    produced by the filter's empty-inlier fallback; ``lost`` additionally
    marks tracks degraded for more than the configured gap.
    """

    x: float
    y: float
    theta: float
    n_visible: int
    degraded: bool
    lost: bool = False


def initial_state(config: PipelineConfig) -> FilterState:
    """Fresh filter state for a new track."""
    return FilterState(params=config.filter_params)


def process_frame(
    config: PipelineConfig, state: FilterState, frame: DetectionFrame
) -> tuple[FilterState, PoseEstimate]:
    """Fuse one frame into the track and return (new state, pose estimate).

    Orientation is decoded first so the corrected center mode can use it
    within the same frame (heading never depends on position).  When no
    keypoint is usable the previous filtered pose is re-emitted with
    ``degraded=True``; on the very first frame with no history this raises
    ColdStartNoObservation instead.
    """
    if frame.orientation.n != config.bin_count:
        raise BinCountMismatch(
            f"frame {frame.frame_id} has {frame.orientation.n} bins, pipeline expects {config.bin_count}"
        )
    theta_deg = decode_orientation(frame.orientation)
    points = visible_backprojections(config.camera, config.model, frame.keypoints)
    if points:
        heading = math.radians(theta_deg) if config.center_mode == "orientation-corrected" else None
        center = center_from_backprojections(config.camera, config.model, points, heading)
        gx, gy, _ = ground_coords(config.camera, center)
        new_state, filtered = update(state, PoseObservation(gx, gy, theta_deg))
        estimate = PoseEstimate(
            x=filtered.x,
            y=filtered.y,
            theta=filtered.theta,
            n_visible=len(points),
            degraded=bool(new_state.last_fallback),
        )
        return new_state, estimate

    previous = current_estimate(state)
    if previous is None:
        raise ColdStartNoObservation(f"frame {frame.frame_id}: no usable keypoints and no history")
    new_state = mark_stale(state)
    estimate = PoseEstimate(
        x=previous.x,
        y=previous.y,
        theta=previous.theta,
        n_visible=0,
        degraded=True,
        lost=new_state.stale_streak > config.max_degraded_gap,
    )
    return new_state, estimate


def plan_goal(estimate: PoseEstimate) -> dict:
    """Serialize a pose estimate as a planner goal record (meters, radians)."""
    return {"x": estimate.x, "y": estimate.y, "theta": math.radians(estimate.theta)}
