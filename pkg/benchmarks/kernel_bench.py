"""Micro-benchmark comparing the compiled kernels with the pure-numpy
fallback.

Times each gather/warp kernel on both backends and prints median wall-clock
per call plus the compiled/numpy speedup.  Run from the repo root:

    python benchmarks/kernel_bench.py --size 512 --iters 7
"""

import argparse
import statistics
import time

import numpy as np

from panocube import _kernels_np
from panocube.projection import _transposed_rotations

try:
    from panocube import _kernels_c
except ImportError:
    _kernels_c = None


def _median_ms(fn, iters):
    times = []
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times)


def _build_cases(size, seed):
    rng = np.random.default_rng(seed)
    h, w = size, 2 * size
    n = h * w
    fw = size // 2

    raster = np.ascontiguousarray(rng.uniform(size=(h, w, 3)))
    depth_raster = rng.uniform(0.5, 3.0, size=(h, w))
    depth_raster[rng.uniform(size=(h, w)) < 0.2] = 0.0
    depth_raster = np.ascontiguousarray(depth_raster)
    rows = rng.uniform(-1.0, h, size=n)
    cols = rng.uniform(-w, 2.0 * w, size=n)
    oidx = np.lexsort((cols, np.floor(rows)))

    faces = np.ascontiguousarray(rng.uniform(size=(6, fw, fw, 3)))
    dfaces = rng.uniform(0.5, 3.0, size=(6, fw, fw))
    dfaces[rng.uniform(size=dfaces.shape) < 0.2] = 0.0
    dfaces = np.ascontiguousarray(dfaces)
    rt = np.ascontiguousarray(_transposed_rotations())
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.ascontiguousarray(dirs * rng.uniform(0.5, 3.0, size=(n, 1)))
    fidx = rng.integers(0, 6, size=n).astype(np.int64)
    frows = rng.uniform(-0.5, fw - 0.5, size=n)
    fcols = rng.uniform(-0.5, fw - 0.5, size=n)

    rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    if np.linalg.det(rot) < 0:
        rot[:, 0] *= -1.0
    rot = np.ascontiguousarray(rot)
    trans = rng.uniform(-0.1, 0.1, size=3)
    ref = np.ascontiguousarray(rng.uniform(size=(n, 3)))
    cref = np.ascontiguousarray(rng.uniform(size=(6 * fw * fw, 3)))
    cdepth = rng.uniform(0.5, 3.0, size=6 * fw * fw)
    cdepth[rng.uniform(size=cdepth.size) < 0.2] = 0.0
    cdirs = rng.normal(size=(6 * fw * fw, 3))
    cdirs /= np.linalg.norm(cdirs, axis=1, keepdims=True)
    foidx = np.lexsort((fcols, np.floor(frows), fidx))

    return [
        ("bilinear_gather",
         lambda k: k.bilinear_gather(raster, rows, cols, True)),
        ("bilinear_gather_invalid",
         lambda k: k.bilinear_gather_invalid(depth_raster, rows, cols, True)),
        ("bilinear_gather_sorted",
         lambda k: k.bilinear_gather_sorted(raster, rows, cols, oidx, True)),
        ("bilinear_gather_sorted_invalid",
         lambda k: k.bilinear_gather_sorted_invalid(depth_raster, rows, cols,
                                                    oidx, True)),
        ("cubemap_gather",
         lambda k: k.cubemap_gather(faces, rt, pts)),
        ("cubemap_gather_invalid",
         lambda k: k.cubemap_gather_invalid(dfaces, rt, pts)),
        ("cubemap_gather_table",
         lambda k: k.cubemap_gather_table(faces, fidx, frows, fcols)),
        ("cubemap_gather_table_invalid",
         lambda k: k.cubemap_gather_table_invalid(dfaces, fidx, frows,
                                                  fcols)),
        ("cubemap_gather_table_sorted",
         lambda k: k.cubemap_gather_table_sorted(faces, fidx, frows, fcols,
                                                 foidx)),
        ("cubemap_gather_table_sorted_invalid",
         lambda k: k.cubemap_gather_table_sorted_invalid(dfaces, fidx, frows,
                                                         fcols, foidx)),
        ("equirect_warp_loss",
         lambda k: k.equirect_warp_loss(ref, raster,
                                        depth_raster.ravel(), dirs, rot,
                                        trans)),
        ("cubemap_warp_loss",
         lambda k: k.cubemap_warp_loss(cref, faces, cdepth, cdirs, rt, rot,
                                       trans)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256,
                    help="equirect height; gathers use height*2*height samples")
    ap.add_argument("--iters", type=int, default=5,
                    help="timing repetitions per kernel (median reported)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels_c is None:
        raise SystemExit("compiled kernels unavailable; build the extension "
                         "first (pip install -e . --no-build-isolation)")

    cases = _build_cases(args.size, args.seed)
    print(f"size={args.size} ({args.size * 2 * args.size} samples), "
          f"iters={args.iters}")
    print(f"{'kernel':34s} {'numpy ms':>10s} {'cython ms':>10s} "
          f"{'speedup':>8s}")
    for name, call in cases:
        call(_kernels_np)  # warm both paths before timing
        call(_kernels_c)
        np_ms = _median_ms(lambda: call(_kernels_np), args.iters)
        c_ms = _median_ms(lambda: call(_kernels_c), args.iters)
        print(f"{name:34s} {np_ms:10.3f} {c_ms:10.3f} {np_ms / c_ms:8.2f}x")


if __name__ == "__main__":
    main()
