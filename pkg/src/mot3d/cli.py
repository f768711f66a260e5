"""Command-line entry points: track, simulate, eval, bench.

Exit codes: 0 success, 1 validation or data errors, 2 usage errors (from
argument parsing). Progress and log output go to stderr; result data goes
only to the requested output files or stdout tables.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clearmetrics import DEFAULT_MATCH_THRESHOLD_M, ClearReport, evaluate_clear
from .config import ConfigError, TrackerConfig, config_from_dict, config_to_dict, load_config
from .dataio import (
    ResultRecord,
    SchemaError,
    load_detections,
    load_results,
    records_by_scene,
    write_detections,
    write_results,
)
from .geometry import BoxState, giou_3d, metric_matrix, MetricKind
from .lifecycle import Tracker, track_scene
from .preprocessing import DetectionFrame, nms, preprocess
from .sim import NoiseSpec, default_scene_spec, generate_scene, scene_detections

logger = logging.getLogger("mot3d.cli")


def _setup_logging() -> None:
    level_name = os.environ.get("MOT3D_LOG", "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mot3d",
        description="3D multi-object tracking on detection files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="run the tracker over a detection file")
    p_track.add_argument("--input", required=True, help="detection JSON file")
    p_track.add_argument("--output", required=True, help="results JSONL file to write")
    p_track.add_argument("--config", help="YAML config file (defaults used if omitted)")
    p_track.add_argument(
        "--parallel-scenes", type=int, default=1, metavar="N",
        help="number of worker processes across scenes (default 1)",
    )

    p_sim = sub.add_parser("simulate", help="generate a synthetic detection file")
    p_sim.add_argument("--output", required=True, help="detection JSON file to write")
    p_sim.add_argument("--ground-truth", required=True, help="ground-truth JSONL file to write")
    p_sim.add_argument("--scenes", type=int, default=1)
    p_sim.add_argument("--tracks", type=int, default=10)
    p_sim.add_argument("--frames", type=int, default=40)
    p_sim.add_argument("--interval", type=float, default=0.5, help="frame spacing in seconds")
    p_sim.add_argument("--noise-pos", type=float, default=0.0, help="center noise std (m)")
    p_sim.add_argument("--noise-yaw", type=float, default=0.0, help="heading noise std (rad)")
    p_sim.add_argument("--noise-vel", type=float, default=0.0, help="velocity noise std (m/s)")
    p_sim.add_argument("--drop-prob", type=float, default=0.0, help="per-box dropout probability")
    p_sim.add_argument("--clutter-rate", type=float, default=0.0, help="mean clutter boxes per frame")
    p_sim.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="score results against ground truth")
    p_eval.add_argument("--input", required=True, help="results JSONL file")
    p_eval.add_argument("--ground-truth", required=True, help="ground-truth JSONL file")
    p_eval.add_argument("--match-threshold", type=float, default=DEFAULT_MATCH_THRESHOLD_M)
    p_eval.add_argument("--output", help="also write the report as JSON here")

    p_bench = sub.add_parser("bench", help="run throughput benchmarks")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--output", help="also write timings as JSON here")

    return parser


def _track_scene_job(job: Tuple[str, List[DetectionFrame], Dict]) -> List[ResultRecord]:
    scene_id, frames, cfg_dict = job
    config = config_from_dict(cfg_dict)
    return track_scene(frames, config, scene_id=scene_id)


def _cmd_track(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else TrackerConfig()
    scenes = load_detections(args.input)
    t0 = time.perf_counter()
    records: List[ResultRecord] = []
    scene_ids = sorted(scenes)
    workers = max(1, args.parallel_scenes)
    if workers > 1 and len(scene_ids) > 1:
        import multiprocessing

        cfg_dict = config_to_dict(config)
        jobs = [(sid, scenes[sid], cfg_dict) for sid in scene_ids]
        with multiprocessing.Pool(min(workers, len(jobs))) as pool:
            for chunk in pool.map(_track_scene_job, jobs):
                records.extend(chunk)
    else:
        for sid in scene_ids:
            records.extend(track_scene(scenes[sid], config, scene_id=sid))
            logger.info("scene %s done (%d frames)", sid, len(scenes[sid]))
    write_results(records, args.output)
    elapsed = time.perf_counter() - t0
    n_frames = sum(len(f) for f in scenes.values())
    logger.info(
        "tracked %d scenes / %d frames -> %d records in %.2fs",
        len(scenes), n_frames, len(records), elapsed,
    )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    noise = NoiseSpec(
        pos_std=args.noise_pos,
        yaw_std=args.noise_yaw,
        vel_std=args.noise_vel,
        drop_prob=args.drop_prob,
        clutter_rate=args.clutter_rate,
    )
    all_frames: Dict[str, List[DetectionFrame]] = {}
    gt: List[ResultRecord] = []
    for i in range(max(1, args.scenes)):
        spec = default_scene_spec(
            scene_id=f"scene-{i + 1:04d}",
            n_tracks=args.tracks,
            n_frames=args.frames,
            frame_interval_s=args.interval,
            noise=noise,
        )
        scene = generate_scene(spec, seed=args.seed + i)
        all_frames.update(scene_detections(scene))
        gt.extend(scene.ground_truth)
        logger.info("generated %s: %d frames, %d objects", spec.scene_id, args.frames, args.tracks)
    write_detections(all_frames, args.output)
    write_results(gt, args.ground_truth)
    return 0


def _format_report(report: ClearReport) -> str:
    rows = [("category", "gt", "match", "fp", "fn", "ids", "mota")]
    data = report.to_dict()
    for name, row in data["per_category"].items():
        mota = "n/a" if row["mota"] is None else f"{row['mota']:.4f}"
        rows.append(
            (name, str(row["gt"]), str(row["matches"]), str(row["false_positives"]),
             str(row["false_negatives"]), str(row["id_switches"]), mota)
        )
    o = data["overall"]
    mota = "n/a" if o["mota"] is None else f"{o['mota']:.4f}"
    rows.append(
        ("OVERALL", str(o["gt"]), str(o["matches"]), str(o["false_positives"]),
         str(o["false_negatives"]), str(o["id_switches"]), mota)
    )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)


def _cmd_eval(args: argparse.Namespace) -> int:
    results = load_results(args.input)
    ground_truth = load_results(args.ground_truth)
    res_scenes = set(records_by_scene(results))
    gt_scenes = set(records_by_scene(ground_truth))
    if res_scenes != gt_scenes:
        missing_in_results = sorted(gt_scenes - res_scenes)
        missing_in_gt = sorted(res_scenes - gt_scenes)
        parts = []
        if missing_in_results:
            parts.append(f"missing from results: {missing_in_results}")
        if missing_in_gt:
            parts.append(f"missing from ground truth: {missing_in_gt}")
        raise SchemaError("scene sets differ; " + "; ".join(parts))
    report = evaluate_clear(results, ground_truth, match_threshold=args.match_threshold)
    print(_format_report(report))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def _random_boxes(rng: np.random.Generator, n: int, field_m: float = 80.0) -> List[BoxState]:
    boxes = []
    for _ in range(n):
        boxes.append(
            BoxState(
                x=float(rng.uniform(-field_m, field_m)),
                y=float(rng.uniform(-field_m, field_m)),
                z=float(rng.uniform(0.5, 1.5)),
                w=float(rng.uniform(0.5, 3.0)),
                l=float(rng.uniform(0.5, 12.0)),
                h=float(rng.uniform(0.5, 4.0)),
                yaw=float(rng.uniform(-math.pi, math.pi)),
                category="car",
                score=float(rng.uniform(0.0, 1.0)),
            )
        )
    return boxes


def _median_time_ms(fn, repeats: int = 5) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    times.sort()
    return times[len(times) // 2]


def run_benchmarks(seed: int = 0) -> Dict[str, float]:
    """Timings for the hot paths; kernels are warmed up before measuring."""
    from scipy.optimize import linear_sum_assignment

    from .motion import init_track, predict, update

    rng = np.random.default_rng(seed)
    a100 = _random_boxes(rng, 100)
    b100 = _random_boxes(rng, 100)
    dense500 = _random_boxes(rng, 500, field_m=60.0)

    # Warm up compiled kernels so the numbers reflect steady state.
    giou_3d(a100[0], b100[0])
    metric_matrix(a100[:5], b100[:5], MetricKind.GIOU_3D)
    metric_matrix(a100[:5], b100[:5], MetricKind.GIOU_BEV)

    report: Dict[str, float] = {}
    report["giou3d_matrix_100x100_ms"] = _median_time_ms(
        lambda: metric_matrix(a100, b100, MetricKind.GIOU_3D)
    )
    report["giou_bev_matrix_100x100_ms"] = _median_time_ms(
        lambda: metric_matrix(a100, b100, MetricKind.GIOU_BEV)
    )
    report["d_eucl_matrix_100x100_ms"] = _median_time_ms(
        lambda: metric_matrix(a100, b100, MetricKind.D_EUCL)
    )

    costs = 1.0 - metric_matrix(a100, b100, MetricKind.GIOU_3D)
    report["hungarian_100x100_ms"] = _median_time_ms(lambda: linear_sum_assignment(costs))

    frame500 = DetectionFrame(0, 0.0, dense500)
    nms(frame500, 0.08)
    report["nms_500_boxes_ms"] = _median_time_ms(lambda: nms(frame500, 0.08))
    report["preprocess_500_boxes_ms"] = _median_time_ms(lambda: preprocess(frame500, 0.5, 0.08))

    cfg = TrackerConfig()
    params = cfg.motion_params("car")
    det = a100[0]
    state = init_track(det, params)
    t0 = time.perf_counter()
    n_cycles = 2000
    for _ in range(n_cycles):
        state = predict(state, params)
        state = update(state, det, params)
    report["ekf_cycle_us"] = (time.perf_counter() - t0) / n_cycles * 1e6

    spec = default_scene_spec(n_tracks=10, n_frames=40)
    scene = generate_scene(spec, seed=seed)
    tracker = Tracker(cfg, scene_id=spec.scene_id)
    t0 = time.perf_counter()
    for frame in scene.frames:
        tracker.step(frame)
    report["pipeline_fps_10_tracks"] = len(scene.frames) / (time.perf_counter() - t0)
    return report


def _cmd_bench(args: argparse.Namespace) -> int:
    report = run_benchmarks(seed=args.seed)
    width = max(len(k) for k in report)
    for key, value in report.items():
        print(f"{key.ljust(width)}  {value:10.3f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    commands = {
        "track": _cmd_track,
        "simulate": _cmd_simulate,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
    }
    try:
        return commands[args.command](args)
    except (SchemaError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
