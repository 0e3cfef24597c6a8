"""Command-line front end: simulate scenarios, replay detection streams, sweep bins.

Exit codes: 0 success, 1 I/O or runtime failure, 2 config/input validation
failure.  Set TROLLEYPOSE_LOG to a level name (DEBUG, INFO, ...) for logs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .config import (
    canonical_config_hash,
    detection_frame_from_dict,
    estimate_to_dict,
    load_json,
    pipeline_from_dict,
    scenario_from_dict,
    sweep_from_dict,
    write_detections_jsonl,
    write_frames_csv,
    write_summary_json,
    write_sweep_csv,
)
from .errors import ColdStartNoObservation, ConfigError, TrolleyPoseError
from .pipeline import PoseEstimate, initial_state, process_frame
from .simulator import run_scenario, sweep_bins

logger = logging.getLogger("trolleypose")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2


def _setup_logging() -> None:
    level = os.environ.get("TROLLEYPOSE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _apply_seed_override(raw: dict, seed) -> dict:
    if seed is not None:
        raw = dict(raw)
        raw["rng_seed"] = seed
    return raw


def _write_manifest(out_dir: Path, raw_config: dict, outputs: list[str], started: float) -> None:
    manifest = {
        "tool": "trolleypose",
        "version": __version__,
        "config_hash": canonical_config_hash(raw_config),
        "rng_seed": raw_config.get("rng_seed", 0),
        "outputs": outputs,
        "duration_s": time.perf_counter() - started,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _simulate_one(config_path: Path, out_dir: Path, seed, strict: bool) -> None:
    started = time.perf_counter()
    raw = _apply_seed_override(load_json(str(config_path)), seed)
    scenario = scenario_from_dict(raw)
    pipeline = pipeline_from_dict(raw, camera=scenario.camera, model=scenario.model)
    records, stats = run_scenario(scenario, pipeline, strict=strict)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_frames_csv(records, out_dir / "frames.csv")
    write_summary_json(stats, out_dir / "summary.json")
    write_detections_jsonl(records, out_dir / "detections.jsonl")
    _write_manifest(out_dir, raw, ["frames.csv", "summary.json", "detections.jsonl"], started)
    logger.info("wrote %d frames to %s", len(records), out_dir)


def cmd_simulate(args) -> int:
    config_path = Path(args.config)
    out_dir = Path(args.out)
    if config_path.is_dir():
        configs = sorted(config_path.glob("*.json"))
        if not configs:
            raise ConfigError(str(config_path), "directory contains no .json configs")
        for cfg in configs:
            _simulate_one(cfg, out_dir / cfg.stem, args.seed, args.strict)
    else:
        _simulate_one(config_path, out_dir, args.seed, args.strict)
    return EXIT_OK


def cmd_estimate(args) -> int:
    raw = load_json(args.config)
    pipeline = pipeline_from_dict(raw)
    state = initial_state(pipeline)
    out = sys.stdout
    with open(args.detections, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                frame = detection_frame_from_dict(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"line {lineno}", f"invalid JSON: {exc.msg}") from exc
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}", str(exc)) from exc
            try:
                state, estimate = process_frame(pipeline, state, frame)
            except ColdStartNoObservation:
                if args.strict:
                    raise
                from .orientation import decode_orientation

                estimate = PoseEstimate(
                    x=0.0, y=0.0, theta=decode_orientation(frame.orientation), n_visible=0, degraded=True
                )
            except TrolleyPoseError as exc:
                raise ConfigError(f"line {lineno}", str(exc)) from exc
            out.write(json.dumps(estimate_to_dict(frame.frame_id, estimate), sort_keys=True) + "\n")
    out.flush()
    return EXIT_OK


def cmd_sweep_bins(args) -> int:
    started = time.perf_counter()
    raw = _apply_seed_override(load_json(args.config), args.seed)
    scenario, bin_counts, samples = sweep_from_dict(raw)
    rows = sweep_bins(scenario, bin_counts, samples)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir / "sweep.csv")
    _write_manifest(out_dir, raw, ["sweep.csv"], started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trolleypose",
        description="Ground-plane trolley pose estimation: synthetic benchmarks and detection replay.",
    )
    parser.add_argument("--version", action="version", version=f"trolleypose {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a synthetic scenario and write frames.csv/summary.json")
    sim.add_argument("--config", required=True, help="scenario JSON file (or a directory of them)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the config's rng_seed")
    sim.add_argument("--strict", action="store_true", help="fail if the first frame has no usable keypoints")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run the estimator over a recorded detections JSONL stream")
    est.add_argument("--detections", required=True, help="detections JSONL file")
    est.add_argument("--config", required=True, help="pipeline JSON config (camera, trolley, filter, ...)")
    est.add_argument("--strict", action="store_true", help="fail if the first frame has no usable keypoints")
    est.set_defaults(func=cmd_estimate)

    swp = sub.add_parser("sweep-bins", help="score the orientation channel across bin discretizations")
    swp.add_argument("--config", required=True, help="sweep JSON config with bin_counts")
    swp.add_argument("--out", required=True, help="output directory")
    swp.add_argument("--seed", type=int, default=None, help="override the config's rng_seed")
    swp.set_defaults(func=cmd_sweep_bins)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # Downstream consumer (e.g. head) closed the pipe; not an error.
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TrolleyPoseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
