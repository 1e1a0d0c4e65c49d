"""Throughput benchmark: sphere-domain (equirect) warp+loss versus the
cubemap pipeline including both conversions, mirroring the timing protocol of
converting the equirect input to a cubemap and the cubemap depth back.

At face_width = height/2 the cubemap carries 6*(h/2)^2 / (2h^2) = 0.75 of the
equirect pixel count, which the report states explicitly.
"""

from __future__ import annotations

import ctypes
import time

import numpy as np

from . import kernels
from .geometry import PoseSE3
from .losses import photometric_loss
from .projection import cubemap_to_equirect, equirect_to_cubemap
from .synthetic import random_scene, random_interior_position, render_equirect
from .warping import depth_to_pointcloud, transform_pointcloud, warp_cubemap, warp_equirect

PIXEL_RATIO = 0.75  # 6*(h/2)^2 / (2*h^2)


def _inputs(height: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    scene = random_scene(rng)
    pos = random_interior_position(scene, rng)
    pose_ref = PoseSE3.from_rotvec((0.0, 0.0, 0.0), pos)
    pose_tgt = PoseSE3.from_rotvec((0.0, 0.01, 0.0), pos + (0.02, 0.0, 0.03))
    ref_rgb, ref_depth = render_equirect(scene, pose_ref, height)
    tgt_rgb, _ = render_equirect(scene, pose_tgt, height)
    rel = pose_tgt.inverse().compose(pose_ref)
    return ref_rgb, ref_depth, tgt_rgb, rel


def _tune_allocator() -> None:
    """Keep large numpy buffers on the heap instead of per-call mmap/munmap
    (glibc promotes allocations above ~32 MB to mmap, which costs a page-fault
    storm on every fresh array at high resolutions). Best effort; a no-op on
    non-glibc platforms."""
    try:
        libc = ctypes.CDLL("libc.so.6")
        libc.mallopt(-3, 1 << 30)  # M_MMAP_THRESHOLD = -3
    except (OSError, AttributeError):
        pass


def _time_median(fn, iters: int) -> float:
    samples = []
    for _ in range(iters):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples)) * 1000.0


def run_bench(heights, iters: int = 5, seed: int = 0) -> dict:
    """Per-resolution timing of the equirect path vs the cubemap path."""
    heights = sorted(int(h) for h in heights)
    if any(h < 64 for h in heights):
        raise ValueError("benchmark heights must be >= 64")
    _tune_allocator()
    rows = []
    for h in heights:
        ref_rgb, ref_depth, tgt_rgb, rel = _inputs(h, seed)
        depth_arr = ref_depth.data[:, :, 0]
        face_width = h // 2
        # cube-form depth stands in for the cubemap-native depth prediction
        depth_cube = equirect_to_cubemap(ref_depth, face_width, invalid_zero=True)

        def equi_pass():
            warped, valid = warp_equirect(depth_arr, tgt_rgb.data, rel)
            if valid.all():
                return float(np.abs(ref_rgb.data - warped).mean())
            return float(np.abs(ref_rgb.data[valid] - warped[valid]).mean())

        def cube_pass():
            ref_cube = equirect_to_cubemap(ref_rgb, face_width)
            tgt_cube = equirect_to_cubemap(tgt_rgb, face_width)
            cloud = transform_pointcloud(depth_to_pointcloud(depth_cube), rel)
            warped, valid = warp_cubemap(cloud, tgt_cube)
            loss = photometric_loss(ref_cube, warped, valid)
            cubemap_to_equirect(depth_cube, h, invalid_zero=True)
            return loss

        equi_pass()  # warm up: build cached ray/conversion tables
        cube_pass()
        # smaller rasters get proportionally more repetitions so their
        # sub-millisecond medians are as stable as the large ones
        reps = min(50, iters * (heights[-1] // h))
        equi_ms = _time_median(equi_pass, reps)
        cube_ms = _time_median(cube_pass, reps)
        rows.append({
            "height": h,
            "equi_ms": equi_ms,
            "cube_ms": cube_ms,
            "fps_equi": 1000.0 / equi_ms,
            "fps_cube": 1000.0 / cube_ms,
            "speedup": equi_ms / cube_ms,
            "pixel_ratio": PIXEL_RATIO,
        })
    speedups = [r["speedup"] for r in rows]
    return {
        "kernel": kernels.active_implementation(),
        "iters": iters,
        "rows": rows,
        "pixel_ratio": PIXEL_RATIO,
        "speedup_trend_nondecreasing": all(
            b >= a for a, b in zip(speedups, speedups[1:])
        ),
        "speedup_exceeds_one_at_top": speedups[-1] > 1.0 if speedups else False,
    }
