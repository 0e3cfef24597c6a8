"""Shared scene-construction helpers for the test suite.

Keypoint placement and frame synthesis here are written from scratch (not
by calling the simulator) so tests using them double as independent checks
of the library's own generation path.
"""

import math

from trolleypose import (
    CameraModel,
    DetectionFrame,
    ImageKeypoint,
    ModelKeypoint,
    TrolleyModel,
    circular_gaussian_target,
    ground_to_camera,
    project_keypoint,
)

LEVEL_CAMERA = CameraModel(
    fx=500.0,
    fy=500.0,
    cx=320.0,
    cy=240.0,
    ground_normal=(0.0, -1.0, 0.0),
    camera_height=0.8,
    image_width=640,
    image_height=480,
)

STANDARD_TROLLEY = TrolleyModel(
    (
        ModelKeypoint(0.40, 0.26, 0.15),
        ModelKeypoint(0.40, -0.26, 0.15),
        ModelKeypoint(-0.40, 0.26, 0.15),
        ModelKeypoint(-0.40, -0.26, 0.15),
        ModelKeypoint(-0.35, 0.25, 1.00),
        ModelKeypoint(-0.35, -0.25, 1.00),
    )
)


def random_camera(rng):
    """Random plausible camera: varied intrinsics, height, tilt, and roll."""
    tilt = rng.uniform(-0.4, 0.4)
    roll = rng.uniform(-0.25, 0.25)
    # (0, -1, 0) rotated about the x-axis by tilt, then about z by roll.
    normal = (
        math.sin(roll) * math.cos(tilt),
        -math.cos(roll) * math.cos(tilt),
        math.sin(tilt),
    )
    return CameraModel(
        fx=rng.uniform(250, 900),
        fy=rng.uniform(250, 900),
        cx=rng.uniform(300, 340),
        cy=rng.uniform(220, 260),
        ground_normal=normal,
        camera_height=rng.uniform(0.5, 2.5),
        image_width=640,
        image_height=480,
    )


def random_trolley(rng, max_height=0.7):
    """Random six-keypoint model with heights clear of typical camera heights."""
    kps = tuple(
        ModelKeypoint(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.05, max_height))
        for _ in range(6)
    )
    return TrolleyModel(kps)


def world_keypoints(model, x, y, theta_deg):
    """Ground-frame keypoint positions for a trolley at pose (x, y, theta)."""
    c = math.cos(math.radians(theta_deg))
    s = math.sin(math.radians(theta_deg))
    return [
        (x + k.offset_x * c - k.offset_y * s, y + k.offset_x * s + k.offset_y * c, k.height)
        for k in model.keypoints
    ]


def observe_pose(camera, model, x, y, theta_deg, visible=None):
    """Project a trolley pose into exact image keypoints.

    ``visible`` masks keypoints off; projected keypoints are forced visible
    regardless of image bounds (the estimator tolerates out-of-frame input).
    """
    obs = []
    for i, (kx, ky, kh) in enumerate(world_keypoints(model, x, y, theta_deg)):
        point = ground_to_camera(camera, kx, ky, kh)
        kp = project_keypoint(camera, point, index=i)
        keep = visible[i] if visible is not None else True
        obs.append(ImageKeypoint(i, kp.u, kp.v, keep))
    return obs


def synth_frame(camera, model, frame_id, x, y, theta_deg, n=360, visible=None, sigma=4.0):
    """Noiseless detection frame for a trolley pose, with an exact target distribution."""
    return DetectionFrame(
        frame_id=frame_id,
        keypoints=tuple(observe_pose(camera, model, x, y, theta_deg, visible)),
        orientation=circular_gaussian_target(theta_deg, sigma, n),
    )
