"""JSON config parsing/validation and file output helpers for the CLI.

Schemas are documented in the README; every validation failure raises
ConfigError naming the offending (dotted) field.  Output serialization
uses Python's shortest round-trip float repr, so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Optional

from .errors import ConfigError
from .filtering import FilterParams
from .geometry import CameraModel, ImageKeypoint, ModelKeypoint, TrolleyModel
from .orientation import OrientationDistribution
from .pipeline import DetectionFrame, PipelineConfig, PoseEstimate
from .simulator import (
    FrameRecord,
    Occluder,
    OrientationNoise,
    ScenarioConfig,
    SummaryStats,
    SweepRow,
    Waypoint,
)


def load_json(path: str) -> Any:
    """Parse a JSON document, anchoring syntax errors to file:line:col."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc


def _require(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise ConfigError(path.rstrip("."), "must be a JSON object")
    if key not in obj:
        raise ConfigError(f"{path}{key}", "is required")
    return obj[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"must be a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"must be an integer, got {value!r}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f"must be a boolean, got {value!r}")
    return value


def camera_from_dict(obj: Any, path: str = "camera") -> CameraModel:
    normal = _require(obj, "ground_normal", f"{path}.")
    if not isinstance(normal, list) or len(normal) != 3:
        raise ConfigError(f"{path}.ground_normal", "must be a list of 3 numbers")
    return CameraModel(
        fx=_number(_require(obj, "fx", f"{path}."), f"{path}.fx"),
        fy=_number(_require(obj, "fy", f"{path}."), f"{path}.fy"),
        cx=_number(_require(obj, "cx", f"{path}."), f"{path}.cx"),
        cy=_number(_require(obj, "cy", f"{path}."), f"{path}.cy"),
        ground_normal=tuple(_number(c, f"{path}.ground_normal[{i}]") for i, c in enumerate(normal)),
        camera_height=_number(_require(obj, "camera_height", f"{path}."), f"{path}.camera_height"),
        image_width=_number(_require(obj, "image_width", f"{path}."), f"{path}.image_width"),
        image_height=_number(_require(obj, "image_height", f"{path}."), f"{path}.image_height"),
    )


def trolley_from_dict(obj: Any, path: str = "trolley") -> TrolleyModel:
    kps = _require(obj, "keypoints", f"{path}.")
    if not isinstance(kps, list):
        raise ConfigError(f"{path}.keypoints", "must be a list of [offset_x, offset_y, height]")
    parsed = []
    for i, entry in enumerate(kps):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ConfigError(f"{path}.keypoints[{i}]", "must be [offset_x, offset_y, height]")
        parsed.append(
            ModelKeypoint(*(_number(v, f"{path}.keypoints[{i}][{j}]") for j, v in enumerate(entry)))
        )
    return TrolleyModel(keypoints=tuple(parsed))


def _filter_from_dict(obj: Any, path: str = "filter") -> FilterParams:
    if obj is None:
        return FilterParams()
    return FilterParams(
        window_size=_integer(obj.get("window_size", 10), f"{path}.window_size"),
        z_threshold=_number(obj.get("z_threshold", 2.0), f"{path}.z_threshold"),
        circular_theta=_boolean(obj.get("circular_theta", True), f"{path}.circular_theta"),
    )


def _orientation_noise_from_dict(obj: Any, path: str = "orientation_noise") -> OrientationNoise:
    if obj is None:
        return OrientationNoise()
    return OrientationNoise(
        mu_jitter_sigma=_number(obj.get("mu_jitter_sigma", 0.0), f"{path}.mu_jitter_sigma"),
        uniform_floor=_number(obj.get("uniform_floor", 0.0), f"{path}.uniform_floor"),
        outlier_rate=_number(obj.get("outlier_rate", 0.0), f"{path}.outlier_rate"),
    )


def _occluder_from_dict(obj: Any, path: str) -> Occluder:
    end = obj.get("frame_end")
    return Occluder(
        u_min=_number(_require(obj, "u_min", f"{path}."), f"{path}.u_min"),
        v_min=_number(_require(obj, "v_min", f"{path}."), f"{path}.v_min"),
        u_max=_number(_require(obj, "u_max", f"{path}."), f"{path}.u_max"),
        v_max=_number(_require(obj, "v_max", f"{path}."), f"{path}.v_max"),
        frame_start=_integer(obj.get("frame_start", 0), f"{path}.frame_start"),
        frame_end=None if end is None else _integer(end, f"{path}.frame_end"),
        du=_number(obj.get("du", 0.0), f"{path}.du"),
        dv=_number(obj.get("dv", 0.0), f"{path}.dv"),
    )


def scenario_from_dict(obj: Any) -> ScenarioConfig:
    traj = _require(obj, "trajectory", "")
    if not isinstance(traj, list) or not traj:
        raise ConfigError("trajectory", "must be a non-empty list of [x, y, theta, t]")
    waypoints = []
    for i, entry in enumerate(traj):
        if not isinstance(entry, list) or len(entry) != 4:
            raise ConfigError(f"trajectory[{i}]", "must be [x, y, theta, t]")
        waypoints.append(Waypoint(*(_number(v, f"trajectory[{i}][{j}]") for j, v in enumerate(entry))))
    occ_list = obj.get("occluders", [])
    if not isinstance(occ_list, list):
        raise ConfigError("occluders", "must be a list")
    occluders = tuple(_occluder_from_dict(o, f"occluders[{i}]") for i, o in enumerate(occ_list))
    return ScenarioConfig(
        camera=camera_from_dict(_require(obj, "camera", "")),
        model=trolley_from_dict(_require(obj, "trolley", "")),
        trajectory=tuple(waypoints),
        occluders=occluders,
        pixel_noise_sigma=_number(obj.get("pixel_noise_sigma", 0.0), "pixel_noise_sigma"),
        pixel_outlier_rate=_number(obj.get("pixel_outlier_rate", 0.0), "pixel_outlier_rate"),
        pixel_outlier_sigma=_number(obj.get("pixel_outlier_sigma", 0.0), "pixel_outlier_sigma"),
        orientation_noise=_orientation_noise_from_dict(obj.get("orientation_noise")),
        target_sigma=_number(obj.get("target_sigma", 4.0), "target_sigma"),
        bin_count=_integer(obj.get("bin_count", 360), "bin_count"),
        rng_seed=_integer(obj.get("rng_seed", 0), "rng_seed"),
        frame_count=_integer(_require(obj, "frame_count", ""), "frame_count"),
        frame_rate=_number(obj.get("frame_rate", 30.0), "frame_rate"),
        self_occlusion=_boolean(obj.get("self_occlusion", False), "self_occlusion"),
    )


def pipeline_from_dict(
    obj: Any, camera: Optional[CameraModel] = None, model: Optional[TrolleyModel] = None
) -> PipelineConfig:
    """Build a PipelineConfig; camera/model may come from a scenario instead."""
    if camera is None:
        camera = camera_from_dict(_require(obj, "camera", ""))
    if model is None:
        model = trolley_from_dict(_require(obj, "trolley", ""))
    mode = obj.get("center_mode", "orientation-corrected")
    if not isinstance(mode, str):
        raise ConfigError("center_mode", f"must be a string, got {mode!r}")
    return PipelineConfig(
        camera=camera,
        model=model,
        filter_params=_filter_from_dict(obj.get("filter")),
        center_mode=mode,
        bin_count=_integer(obj.get("bin_count", 360), "bin_count"),
        max_degraded_gap=_integer(obj.get("max_degraded_gap", 30), "max_degraded_gap"),
    )


def sweep_from_dict(obj: Any) -> tuple[ScenarioConfig, list[int], int]:
    """Parse a sweep config: a scenario plus bin_counts and samples_per_bin."""
    scenario = scenario_from_dict(obj)
    counts = _require(obj, "bin_counts", "")
    if not isinstance(counts, list) or not counts:
        raise ConfigError("bin_counts", "must be a non-empty list of integers")
    bin_counts = [_integer(c, f"bin_counts[{i}]") for i, c in enumerate(counts)]
    samples = _integer(obj.get("samples_per_bin", 10000), "samples_per_bin")
    return scenario, bin_counts, samples


# ---------------------------------------------------------------------------
# Detection stream (JSONL) schema
# ---------------------------------------------------------------------------

def detection_frame_from_dict(obj: Any) -> DetectionFrame:
    kps = _require(obj, "keypoints", "")
    if not isinstance(kps, list) or len(kps) != 6:
        got = len(kps) if isinstance(kps, list) else type(kps).__name__
        raise ConfigError("keypoints", f"expected 6 keypoints, got {got}")
    keypoints = []
    for i, kp in enumerate(kps):
        keypoints.append(
            ImageKeypoint(
                index=_integer(_require(kp, "index", f"keypoints[{i}]."), f"keypoints[{i}].index"),
                u=_number(_require(kp, "u", f"keypoints[{i}]."), f"keypoints[{i}].u"),
                v=_number(_require(kp, "v", f"keypoints[{i}]."), f"keypoints[{i}].v"),
                visible=_boolean(_require(kp, "visible", f"keypoints[{i}]."), f"keypoints[{i}].visible"),
            )
        )
    ori = _require(obj, "orientation", "")
    bins = _require(ori, "bins", "orientation.")
    if not isinstance(bins, list):
        raise ConfigError("orientation.bins", "must be a list of probabilities")
    try:
        dist = OrientationDistribution(bins)
    except Exception as exc:
        raise ConfigError("orientation.bins", str(exc)) from exc
    ts = obj.get("timestamp")
    return DetectionFrame(
        frame_id=_integer(_require(obj, "frame_id", ""), "frame_id"),
        keypoints=tuple(keypoints),
        orientation=dist,
        timestamp=None if ts is None else _number(ts, "timestamp"),
    )


def detection_frame_to_dict(frame: DetectionFrame) -> dict:
    return {
        "frame_id": frame.frame_id,
        "timestamp": frame.timestamp,
        "keypoints": [
            {"index": kp.index, "u": kp.u, "v": kp.v, "visible": kp.visible}
            for kp in frame.keypoints
        ],
        "orientation": {"bins": [float(b) for b in frame.orientation.bins]},
    }


def estimate_to_dict(frame_id: int, estimate: PoseEstimate) -> dict:
    return {
        "frame_id": frame_id,
        "x": estimate.x,
        "y": estimate.y,
        "theta": estimate.theta,
        "n_visible": estimate.n_visible,
        "degraded": estimate.degraded,
        "lost": estimate.lost,
    }


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

FRAMES_CSV_HEADER = (
    "frame_id,gt_x,gt_y,gt_theta,est_x,est_y,est_theta,n_visible,degraded,err_x,err_y,err_theta"
)


def _fmt(value: float) -> str:
    return repr(float(value))


def frames_csv_lines(records: list[FrameRecord]) -> list[str]:
    lines = [FRAMES_CSV_HEADER]
    for r in records:
        e = r.estimate
        lines.append(
            ",".join(
                [
                    str(r.frame_id),
                    _fmt(r.gt_x),
                    _fmt(r.gt_y),
                    _fmt(r.gt_theta),
                    _fmt(e.x),
                    _fmt(e.y),
                    _fmt(e.theta),
                    str(e.n_visible),
                    "true" if e.degraded else "false",
                    _fmt(r.err_x),
                    _fmt(r.err_y),
                    _fmt(r.err_theta),
                ]
            )
        )
    return lines


def write_frames_csv(records: list[FrameRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(frames_csv_lines(records)) + "\n")


def write_summary_json(stats: SummaryStats, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_detections_jsonl(records: list[FrameRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(detection_frame_to_dict(r.detection), sort_keys=True) + "\n")


SWEEP_CSV_HEADER = "Bins,ADE,Acc-5,Acc-15,Acc-30"


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for row in rows:
            fh.write(
                f"{row.bins},{_fmt(row.ade)},{_fmt(row.acc_5)},{_fmt(row.acc_15)},{_fmt(row.acc_30)}\n"
            )


def canonical_config_hash(obj: Any) -> str:
    """Stable sha256 of the canonicalized (sorted, compact) config JSON."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
