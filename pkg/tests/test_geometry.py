import itertools
import math

import numpy as np
import pytest

from helpers import observe_pose, random_camera, random_trolley

from trolleypose import (
    CameraModel,
    ImageKeypoint,
    ModelKeypoint,
    Point3,
    TrolleyModel,
    backproject_keypoint,
    estimate_center,
    ground_coords,
    ground_to_camera,
    project_keypoint,
)
from trolleypose.errors import (
    BehindCamera,
    ConfigError,
    DegenerateRay,
    InvisibleKeypoint,
    NoUsableKeypoints,
)
from trolleypose.geometry import ensure_valid_pairing, ground_basis


class TestBackprojection:
    def test_hand_computed_example(self, camera):
        # ray (0, 0.2, 1), |n.ray| = 0.2, scale = |0.8 - 0.3| / 0.2 = 2.5
        p = backproject_keypoint(camera, ImageKeypoint(0, 320.0, 340.0, True), 0.3)
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(0.5, abs=1e-12)
        assert p.z == pytest.approx(2.5, abs=1e-12)

    def test_unit_intrinsics(self):
        cam = CameraModel(1.0, 1.0, 0.0, 0.0, (0.0, -1.0, 0.0), 1.0, 10, 10)
        p = backproject_keypoint(cam, ImageKeypoint(0, 0.0, 0.5, True), 0.0)
        assert p == pytest.approx((0.0, 1.0, 2.0), abs=1e-12)

    def test_horizon_ray_is_degenerate(self, camera):
        # v == cy gives a ray parallel to a level ground plane
        with pytest.raises(DegenerateRay):
            backproject_keypoint(camera, ImageKeypoint(0, 100.0, 240.0, True), 0.3)

    def test_invisible_keypoint_rejected(self, camera):
        with pytest.raises(InvisibleKeypoint):
            backproject_keypoint(camera, ImageKeypoint(0, 320.0, 340.0, False), 0.3)

    def test_keypoint_at_camera_height_rejected(self, camera):
        with pytest.raises(DegenerateRay):
            backproject_keypoint(camera, ImageKeypoint(0, 320.0, 340.0, True), camera.camera_height)


class TestProjection:
    def test_inverse_of_backprojection_example(self, camera):
        kp = project_keypoint(camera, Point3(0.0, 0.5, 2.5))
        assert (kp.u, kp.v) == pytest.approx((320.0, 340.0), abs=1e-12)
        assert kp.visible

    def test_principal_axis(self, camera):
        kp = project_keypoint(camera, Point3(0.0, 0.0, 1.0))
        assert (kp.u, kp.v) == (320.0, 240.0)

    def test_behind_camera(self, camera):
        with pytest.raises(BehindCamera):
            project_keypoint(camera, Point3(0.0, 0.0, -1.0))

    def test_out_of_bounds_marked_invisible(self, camera):
        kp = project_keypoint(camera, Point3(10.0, 0.5, 2.5))
        assert not kp.visible


def test_round_trip_random_cameras():
    # project then backproject closes for ground-consistent keypoints
    rng = np.random.default_rng(20240811)
    checked = 0
    while checked < 300:
        cam = random_camera(rng)
        zeta = rng.uniform(0.0, 0.95 * cam.camera_height)
        point = ground_to_camera(cam, rng.uniform(-3, 3), rng.uniform(0.8, 12.0), zeta)
        if not 0.5 <= point.z <= 15.0:
            continue
        kp = project_keypoint(cam, point)
        back = backproject_keypoint(cam, ImageKeypoint(0, kp.u, kp.v, True), zeta)
        assert max(abs(a - b) for a, b in zip(back, point)) < 1e-9
        # signed plane residual fixed by the frame convention
        n = cam.ground_normal
        residual = n[0] * back.x + n[1] * back.y + n[2] * back.z + (cam.camera_height - zeta)
        assert abs(residual) < 1e-9
        checked += 1


class TestEstimateCenter:
    def test_unrotated_average_example(self):
        # camera whose ground basis is the identity, so offsets subtract
        # componentwise; two keypoints backproject to (1.2, 1, 3) and
        # (0.8, 1, 3), model offsets (+-0.2, 0, 0.1), mean is (1, 1, 2.9)
        cam = CameraModel(1.0, 1.0, 0.0, 0.0, (0.0, 0.0, 1.0), 3.1, 2, 2)
        model = TrolleyModel(
            (
                ModelKeypoint(0.2, 0.0, 0.1),
                ModelKeypoint(-0.2, 0.0, 0.1),
                ModelKeypoint(0.0, 0.0, 0.05),
                ModelKeypoint(0.0, 0.0, 0.05),
                ModelKeypoint(0.0, 0.0, 0.05),
                ModelKeypoint(0.0, 0.0, 0.05),
            )
        )
        obs = [
            ImageKeypoint(0, 0.4, 1.0 / 3.0, True),
            ImageKeypoint(1, 0.8 / 3.0, 1.0 / 3.0, True),
        ] + [ImageKeypoint(i, 0.0, 0.0, False) for i in range(2, 6)]
        center = estimate_center(cam, model, obs)
        assert center == pytest.approx((1.0, 1.0, 2.9), abs=1e-12)

    def test_zero_offset_single_keypoint_identity(self, camera):
        # with zero planar offset the center sits directly below the keypoint:
        # same planar ground position, dropped to the ground
        model = TrolleyModel(tuple(ModelKeypoint(0.0, 0.0, 0.3) for _ in range(6)))
        obs = [ImageKeypoint(0, 320.0, 340.0, True)] + [
            ImageKeypoint(i, 0.0, 0.0, False) for i in range(1, 6)
        ]
        center = estimate_center(camera, model, obs)
        point = backproject_keypoint(camera, obs[0], 0.3)
        cgx, cgy, ch = ground_coords(camera, center)
        pgx, pgy, ph = ground_coords(camera, point)
        assert (cgx, cgy) == pytest.approx((pgx, pgy), abs=1e-12)
        assert ch == pytest.approx(0.0, abs=1e-12)
        assert ph == pytest.approx(0.3, abs=1e-12)

    def test_all_invisible_raises(self, camera, trolley):
        obs = [ImageKeypoint(i, 0.0, 0.0, False) for i in range(6)]
        with pytest.raises(NoUsableKeypoints):
            estimate_center(camera, trolley, obs)

    def test_degenerate_rays_excluded(self, camera, trolley):
        # keypoint 0 on the horizon is skipped, keypoint 1 still works
        obs = observe_pose(camera, trolley, 0.3, 2.5, 0.0)
        obs[0] = ImageKeypoint(0, 320.0, camera.cy, True)
        obs = obs[:2] + [ImageKeypoint(i, 0.0, 0.0, False) for i in range(2, 6)]
        center = estimate_center(camera, trolley, obs, orientation=0.0)
        gx, gy, _ = ground_coords(camera, center)
        assert (gx, gy) == pytest.approx((0.3, 2.5), abs=1e-9)

    def test_single_keypoint_recovers_center(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            cam = random_camera(rng)
            model = random_trolley(rng, max_height=0.45 * cam.camera_height)
            x, y = rng.uniform(-1.5, 1.5), rng.uniform(1.5, 8.0)
            theta = rng.uniform(0.0, 360.0)
            truth = ground_to_camera(cam, x, y, 0.0)
            for i in range(6):
                mask = [j == i for j in range(6)]
                obs = observe_pose(cam, model, x, y, theta, visible=mask)
                center = estimate_center(cam, model, obs, orientation=math.radians(theta))
                assert max(abs(a - b) for a, b in zip(center, truth)) < 1e-9

    def test_subset_consistency(self, camera, trolley):
        x, y, theta = 0.4, 3.0, 211.0
        full = observe_pose(camera, trolley, x, y, theta)
        results = []
        for subset in itertools.chain.from_iterable(
            itertools.combinations(range(6), k) for k in range(1, 7)
        ):
            mask = [i in subset for i in range(6)]
            obs = [
                ImageKeypoint(kp.index, kp.u, kp.v, mask[kp.index]) for kp in full
            ]
            results.append(estimate_center(camera, trolley, obs, orientation=math.radians(theta)))
        ref = results[0]
        for c in results[1:]:
            assert max(abs(a - b) for a, b in zip(c, ref)) < 1e-9

    def test_unrotated_matches_corrected_at_reference_heading(self, camera, trolley):
        obs = observe_pose(camera, trolley, -0.2, 2.2, 0.0)
        literal = estimate_center(camera, trolley, obs)
        corrected = estimate_center(camera, trolley, obs, orientation=0.0)
        assert max(abs(a - b) for a, b in zip(literal, corrected)) < 1e-12

    def test_unrotated_is_biased_off_reference_heading(self, camera, trolley):
        obs = observe_pose(camera, trolley, 0.0, 2.5, 90.0)
        literal = estimate_center(camera, trolley, obs)
        corrected = estimate_center(camera, trolley, obs, orientation=math.radians(90.0))
        assert max(abs(a - b) for a, b in zip(literal, corrected)) > 1e-3


class TestGroundFrame:
    def test_round_trip(self, camera):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = Point3(*rng.uniform(-5, 5, 3))
            gx, gy, h = ground_coords(camera, p)
            back = ground_to_camera(camera, gx, gy, h)
            assert max(abs(a - b) for a, b in zip(back, p)) < 1e-12

    def test_level_camera_axes(self, camera):
        e1, e2, up = ground_basis(camera)
        assert e1 == pytest.approx((1.0, 0.0, 0.0))
        assert e2 == pytest.approx((0.0, 0.0, 1.0))
        assert up == pytest.approx((0.0, -1.0, 0.0))

    def test_camera_foot_point_is_origin(self, camera):
        gx, gy, h = ground_coords(camera, Point3(0.0, 0.0, 0.0))
        assert (gx, gy) == (0.0, 0.0)
        assert h == pytest.approx(camera.camera_height)


class TestValidation:
    def test_camera_rejects_non_unit_normal(self):
        with pytest.raises(ConfigError):
            CameraModel(500, 500, 320, 240, (0.0, -2.0, 0.0), 0.8, 640, 480)

    def test_camera_rejects_bad_focal(self):
        with pytest.raises(ConfigError):
            CameraModel(0.0, 500, 320, 240, (0.0, -1.0, 0.0), 0.8, 640, 480)

    def test_camera_rejects_bad_height(self):
        with pytest.raises(ConfigError):
            CameraModel(500, 500, 320, 240, (0.0, -1.0, 0.0), 0.0, 640, 480)

    def test_trolley_needs_six_keypoints(self):
        with pytest.raises(ConfigError):
            TrolleyModel((ModelKeypoint(0, 0, 0.1),) * 5)

    def test_trolley_rejects_negative_height(self):
        kps = (ModelKeypoint(0, 0, -0.1),) + (ModelKeypoint(0, 0, 0.1),) * 5
        with pytest.raises(ConfigError):
            TrolleyModel(kps)

    def test_pairing_needs_a_keypoint_below_camera(self, camera):
        tall = TrolleyModel(tuple(ModelKeypoint(0, 0, 2.0) for _ in range(6)))
        with pytest.raises(ConfigError):
            ensure_valid_pairing(camera, tall)

    def test_keypoint_index_range(self):
        with pytest.raises(ConfigError):
            ImageKeypoint(6, 0.0, 0.0, True)
