"""Modified moving-average filter over planar poses.

A sliding window of the last ``window_size`` raw observations is kept per
track.  On each update, per-component z-scores over the window mark
outliers; the filtered value is the mean of the inliers, or the latest
observation when everything in the window is flagged (only possible with
z_threshold < 1).  Heading is handled with circular statistics by default:
mean via summed unit vectors, deviations via shortest-arc distance.  Set
``circular_theta=False`` for plain linear arithmetic on degrees (breaks at
the 0/360 seam; kept for comparison).

States are immutable values: ``update`` returns a new state, so distinct
tracks can be filtered concurrently as long as each track applies its own
updates in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError, EmptyWindow
from .orientation import angular_distance, normalize_angle


@dataclass(frozen=True)
class FilterParams:
    """Window size and z-score threshold for outlier rejection."""

    window_size: int = 10
    z_threshold: float = 2.0
    circular_theta: bool = True

    def __post_init__(self):
        if not (isinstance(self.window_size, int) and self.window_size >= 1):
            raise ConfigError("filter.window_size", f"must be an integer >= 1, got {self.window_size}")
        if not self.z_threshold > 0:
            raise ConfigError("filter.z_threshold", f"must be > 0, got {self.z_threshold}")


@dataclass(frozen=True)
class PoseObservation:
    """One raw planar pose sample: x, y in meters, theta in degrees [0, 360)."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"pose components must be finite: {(self.x, self.y, self.theta)}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", float(normalize_angle(self.theta)))


@dataclass(frozen=True)
class FilterState:
    """Window of raw observations plus the last filtered output.

    ``last_fallback`` lists the components whose inlier set was empty on the
    most recent update; ``stale_streak`` counts consecutive frames the caller
    reported without a usable observation (see the pipeline module).
    """

    params: FilterParams
    window: tuple[PoseObservation, ...] = ()
    last_filtered: Optional[PoseObservation] = None
    last_fallback: tuple[str, ...] = ()
    stale_streak: int = 0

    @property
    def latest(self) -> Optional[PoseObservation]:
        return self.window[-1] if self.window else None


def _mean_exact(values: list[float]) -> float:
    # identical values average to themselves bitwise (0.7*5/5 != 0.7 in floats)
    first = values[0]
    if all(v == first for v in values):
        return first
    return sum(values) / len(values)


def _linear_zscores(values: list[float]) -> list[float]:
    n = len(values)
    mean = sum(values) / n
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / n)
    if sd == 0.0:
        return [0.0] * n
    return [abs(v - mean) / sd for v in values]


def _circular_mean(degrees: list[float]) -> float:
    first = degrees[0]
    if all(d == first for d in degrees):
        # skip the trig round-trip so constant windows stay bitwise exact
        return normalize_angle(first)
    s = sum(math.sin(math.radians(d)) for d in degrees)
    c = sum(math.cos(math.radians(d)) for d in degrees)
    # atan2(0, 0) = 0 covers the fully cancelled (antipodal) case.
    return normalize_angle(math.degrees(math.atan2(s, c)))


def _circular_zscores(degrees: list[float]) -> list[float]:
    mean = _circular_mean(degrees)
    devs = [angular_distance(d, mean) for d in degrees]
    sd = math.sqrt(sum(d * d for d in devs) / len(devs))
    if sd == 0.0:
        return [0.0] * len(devs)
    return [d / sd for d in devs]


def z_scores(state: FilterState) -> dict[str, list[float]]:
    """Per-component z-scores of every observation in the current window.

    Components with zero spread return all-zero scores (everything inlier).
    """
    if not state.window:
        raise EmptyWindow("filter window is empty")
    xs = [o.x for o in state.window]
    ys = [o.y for o in state.window]
    ts = [o.theta for o in state.window]
    theta_z = _circular_zscores(ts) if state.params.circular_theta else _linear_zscores(ts)
    return {"x": _linear_zscores(xs), "y": _linear_zscores(ys), "theta": theta_z}


def update(state: FilterState, obs: PoseObservation) -> tuple[FilterState, PoseObservation]:
    """Append an observation and return (new state, filtered pose).

    Per component, observations with a z-score above the threshold are
    dropped and the rest averaged; if nothing survives, the component falls
    back to the latest observation.  The window holds raw observations only.
    """
    window = (state.window + (obs,))[-state.params.window_size :]
    interim = FilterState(params=state.params, window=window)
    scores = z_scores(interim)
    thr = state.params.z_threshold
    fallback: list[str] = []

    def filter_linear(values: list[float], zs: list[float], latest: float, name: str) -> float:
        kept = [v for v, z in zip(values, zs) if z <= thr]
        if not kept:
            fallback.append(name)
            return latest
        return sum(kept) / len(kept)

    xs = [o.x for o in window]
    ys = [o.y for o in window]
    ts = [o.theta for o in window]
    fx = filter_linear(xs, scores["x"], obs.x, "x")
    fy = filter_linear(ys, scores["y"], obs.y, "y")
    kept_t = [v for v, z in zip(ts, scores["theta"]) if z <= thr]
    if not kept_t:
        fallback.append("theta")
        ft = obs.theta
    elif state.params.circular_theta:
        ft = _circular_mean(kept_t)
    else:
        ft = sum(kept_t) / len(kept_t)

    filtered = PoseObservation(fx, fy, ft)
    new_state = FilterState(
        params=state.params,
        window=window,
        last_filtered=filtered,
        last_fallback=tuple(fallback),
        stale_streak=0,
    )
    return new_state, filtered


def current_estimate(state: FilterState) -> Optional[PoseObservation]:
    """Last filtered output, or None before any update."""
    return state.last_filtered


def mark_stale(state: FilterState) -> FilterState:
    """Record a frame that produced no usable observation for this track."""
    return replace(state, stale_streak=state.stale_streak + 1)
