"""Command-line pipelines over the library: conversion, rendering, warping,
loss evaluation, pose estimation, metrics and the throughput benchmark.

Exit codes: 0 success, 1 precondition/argument errors, 2 I/O or parse errors.
PANOCUBE_THREADS caps the BLAS/OpenMP thread pools.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io as pio
from .bench import run_bench
from .geometry import FACE_ORDER, PoseSE3
from .losses import (LossWeights, explainability_loss, loss_report,
                     photometric_loss, pose_consistency_loss,
                     replicate_pose_per_face, smoothness_loss)
from .metrics import depth_metrics, rpe
from .pose_estimator import SolverConfig, estimate_pose
from .projection import Cubemap, cubemap_to_equirect, equirect_to_cubemap
from .synthetic import load_scene, load_trajectory, render_sequence
from .warping import depth_to_pointcloud, transform_pointcloud, warp_cubemap


def _dump_json(record: dict, out: str | None) -> None:
    text = json.dumps(record, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _round9(x):
    if isinstance(x, float):
        return float(f"{x:.9g}")
    if isinstance(x, dict):
        return {k: _round9(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_round9(v) for v in x]
    return x


def _maybe_dump_config(args) -> bool:
    if getattr(args, "dump_config", False):
        cfg = {k: v for k, v in vars(args).items()
               if k not in ("func", "dump_config") and v is not None}
        _dump_json(cfg, None)
        return True
    return False


def _load_frame_cubemaps(args):
    """Equirect RGB ref/tgt + equirect depth -> cubemaps at --face-width."""
    ref = equirect_to_cubemap(pio.load_equirect(args.ref), args.face_width)
    tgt = equirect_to_cubemap(pio.load_equirect(args.tgt), args.face_width)
    depth_equi = pio.load_equirect(args.depth)
    depth = equirect_to_cubemap(depth_equi, args.face_width, invalid_zero=True)
    return ref, tgt, depth


def cmd_convert(args) -> int:
    if args.direction == "equi2cube":
        src = pio.load_equirect(args.input)
        is_depth = Path(args.input).suffix.lower() == ".pfm"
        cube = equirect_to_cubemap(src, args.size, invalid_zero=is_depth)
        pio.write_cubemap(args.output, cube, depth=is_depth)
    else:
        is_depth = Path(args.output).suffix.lower() == ".pfm"
        cube = pio.read_cubemap(args.input, depth=is_depth)
        equi = cubemap_to_equirect(cube, args.size, invalid_zero=is_depth)
        if is_depth:
            pio.write_pfm(args.output, equi.data[:, :, 0])
        else:
            pio.write_png(args.output, equi.data)
    return 0


def cmd_render(args) -> int:
    scene = load_scene(args.scene)
    traj = load_trajectory(args.trajectory)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    frames, relative = render_sequence(scene, traj, args.height)
    for i, frame in enumerate(frames):
        pio.write_png(outdir / f"frame_{i:03d}_rgb.png", frame["rgb"].data)
        pio.write_pfm(outdir / f"frame_{i:03d}_depth.pfm", frame["depth"].data[:, :, 0])
    pio.write_poses_json(outdir / "poses.json", [f["pose"] for f in frames], relative)
    return 0


def cmd_warp(args) -> int:
    pose = pio.read_pose_json(args.pose)
    depth_equi = pio.load_equirect(args.depth)
    tgt = equirect_to_cubemap(pio.load_equirect(args.target), args.face_width)
    depth = equirect_to_cubemap(depth_equi, args.face_width, invalid_zero=True)
    cloud = transform_pointcloud(depth_to_pointcloud(depth), pose)
    warped, valid = warp_cubemap(cloud, tgt)
    pio.write_cubemap(args.out, warped)
    pio.write_cubemap(str(args.out) + "_mask",
                      Cubemap(valid.astype(float)[..., None]))
    return 0


def cmd_losses(args) -> int:
    ref, tgt, depth = _load_frame_cubemaps(args)
    pose = pio.read_pose_json(args.pose)
    cloud = transform_pointcloud(depth_to_pointcloud(depth), pose)
    warped, valid = warp_cubemap(cloud, tgt)

    mask = None
    exp = 0.0
    if args.mask:
        mask_equi = pio.load_equirect(args.mask)
        mask = equirect_to_cubemap(mask_equi, args.face_width, invalid_zero=True)
        mask = Cubemap(np.clip(mask.faces, 0.0, 1.0))
        # the regularizer's log only exists for positive masks; hard 0/1
        # occlusion masks weight the photometric term but skip this term
        if np.all(mask.faces > 0):
            exp = explainability_loss(mask)

    rec = photometric_loss(ref, warped, valid, mask)
    # one global pose replicated per face is exactly consistent
    pose_term = pose_consistency_loss(replicate_pose_per_face(pose))
    sm = smoothness_loss(depth)
    weights = LossWeights(*args.weights) if args.weights else LossWeights()
    record = loss_report(rec, pose_term, sm, exp, weights)
    _dump_json(_round9(record), args.out)
    return 0


def cmd_estimate_pose(args) -> int:
    ref, tgt, depth = _load_frame_cubemaps(args)
    init = pio.read_pose_json(args.init) if args.init else PoseSE3.identity()
    cfg = SolverConfig(
        max_iterations=args.max_iterations,
        huber_threshold=args.huber_threshold,
        pyramid_levels=args.pyramid_levels,
    )
    pose, report = estimate_pose(ref, tgt, depth, init, cfg)
    _dump_json(_round9(report), args.out)
    return 0


def cmd_metrics(args) -> int:
    if args.kind == "depth":
        pred = pio.read_pfm(args.pred)
        gt = pio.read_pfm(args.gt)
        valid = (gt > 0) & (pred > 0)
        result = depth_metrics(pred, gt, valid, median_scale=args.median_scale)
        _dump_json(_round9(result.to_dict()), args.out)
    else:
        pred = pio.read_poses_json(args.pred)
        gt = pio.read_poses_json(args.gt)
        key = "relative_poses"
        pred_list = pred.get(key, pred["poses"])
        gt_list = gt.get(key, gt["poses"])
        result = rpe(pred_list, gt_list)
        _dump_json(_round9(result.to_dict()), args.out)
    return 0


def cmd_bench(args) -> int:
    report = run_bench(args.heights, iters=args.iters)
    _dump_json(_round9(report), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panocube",
        description="360-degree vision geometry toolkit: equirect/cubemap "
                    "projection, spherical warping, losses, pose estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--dump-config", action="store_true",
                       help="print the effective configuration and exit")
        p.add_argument("--out", default=None, help="write JSON output here")

    p = sub.add_parser("convert", help="equirect <-> cubemap conversion")
    p.add_argument("input", help="equirect image (png/pfm) or cubemap prefix")
    p.add_argument("output", help="cubemap prefix or equirect image path")
    p.add_argument("--direction", choices=["equi2cube", "cube2equi"], required=True)
    p.add_argument("--size", type=int, required=True,
                   help="face width (equi2cube) or panorama height (cube2equi)")
    add_common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("render", help="render a synthetic scene trajectory")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("trajectory", help="trajectory JSON")
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--outdir", required=True)
    add_common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("warp", help="warp a target frame into the reference view")
    p.add_argument("--depth", required=True, help="reference equirect depth PFM")
    p.add_argument("--target", required=True, help="target equirect RGB PNG")
    p.add_argument("--pose", required=True, help="relative pose JSON (ref -> tgt frame)")
    p.add_argument("--face-width", type=int, default=64)
    p.add_argument("--out", required=True, help="output cubemap prefix")
    p.add_argument("--dump-config", action="store_true")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("losses", help="evaluate the training objectives")
    p.add_argument("--ref", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--pose", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--face-width", type=int, default=64)
    p.add_argument("--weights", type=float, nargs=3, default=None,
                   metavar=("POSE", "SM", "EXP"))
    add_common(p)
    p.set_defaults(func=cmd_losses)

    p = sub.add_parser("estimate-pose", help="direct photometric pose estimation")
    p.add_argument("--ref", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--init", default=None)
    p.add_argument("--face-width", type=int, default=64)
    p.add_argument("--max-iterations", type=int, default=25)
    p.add_argument("--huber-threshold", type=float, default=0.1)
    p.add_argument("--pyramid-levels", type=int, default=3)
    add_common(p)
    p.set_defaults(func=cmd_estimate_pose)

    p = sub.add_parser("metrics", help="depth metrics or relative pose error")
    p.add_argument("--kind", choices=["depth", "rpe"], required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--median-scale", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="equirect vs cubemap throughput benchmark")
    p.add_argument("--heights", type=int, nargs="+", default=[128, 256, 512, 1024])
    p.add_argument("--iters", type=int, default=5)
    add_common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("PANOCUBE_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    parser = build_parser()
    args = parser.parse_args(argv)
    if _maybe_dump_config(args):
        return 0
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, pio.PfmError, json.JSONDecodeError, KeyError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
