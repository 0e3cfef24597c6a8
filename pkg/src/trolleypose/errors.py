"""Exception types raised across the package."""


class TrolleyPoseError(Exception):
    """Base class for all trolleypose errors."""


class ConfigError(TrolleyPoseError):
    """A configuration value failed validation; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateRay(TrolleyPoseError):
    """Pixel ray is too close to parallel with the ground plane to fix depth."""


class InvisibleKeypoint(TrolleyPoseError):
    """Back-projection was asked for a keypoint flagged not visible."""


class NoUsableKeypoints(TrolleyPoseError):
    """Every keypoint in the frame is invisible or degenerate."""


class BehindCamera(TrolleyPoseError):
    """Projection was asked for a point with non-positive depth."""


class NonPositiveSigma(TrolleyPoseError):
    """A Gaussian width parameter must be strictly positive."""


class BinCountMismatch(TrolleyPoseError):
    """Two orientation distributions have different bin counts."""


class LengthMismatch(TrolleyPoseError):
    """Paired prediction/truth sequences have different lengths."""


class EmptyInput(TrolleyPoseError):
    """A metric was asked to aggregate over an empty sequence."""


class EmptyWindow(TrolleyPoseError):
    """Filter statistics were requested on an empty window."""


class FrameOutOfRange(TrolleyPoseError):
    """Frame index is outside a scenario's configured frame count."""


class ColdStartNoObservation(TrolleyPoseError):
    """First frame carries no usable keypoints and there is no history yet."""
