"""Monocular ground-plane pose estimation for luggage trolleys.

Position comes from back-projecting detected keypoints onto known-height
planes, heading from a discretized orientation distribution, and both are
refined over time by a moving-average filter with z-score outlier
rejection.  A deterministic simulator plus CLI benchmark the pipeline
under occlusion and noise.
"""

__version__ = "0.1.0"

from .errors import (
    BehindCamera,
    BinCountMismatch,
    ColdStartNoObservation,
    ConfigError,
    DegenerateRay,
    EmptyInput,
    EmptyWindow,
    FrameOutOfRange,
    InvisibleKeypoint,
    LengthMismatch,
    NonPositiveSigma,
    NoUsableKeypoints,
    TrolleyPoseError,
)
from .filtering import FilterParams, FilterState, PoseObservation, current_estimate, update, z_scores
from .geometry import (
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
from .orientation import (
    OrientationDistribution,
    acc_within,
    ade,
    angular_distance,
    circular_gaussian_target,
    decode_orientation,
    normalize_angle,
    orientation_loss,
)
from .pipeline import (
    DetectionFrame,
    PipelineConfig,
    PoseEstimate,
    initial_state,
    plan_goal,
    process_frame,
)
from .simulator import (
    FrameRecord,
    Occluder,
    OrientationNoise,
    ScenarioConfig,
    SummaryStats,
    SweepRow,
    Waypoint,
    generate_frame,
    run_scenario,
    summarize,
    sweep_bins,
)
