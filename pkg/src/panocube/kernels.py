"""Hot-loop kernel dispatch: compiled Cython extension when available,
pure-numpy fallback otherwise.

Set PANOCUBE_PURE_PYTHON=1 to force the numpy path (used by the kernel
benchmark and for debugging).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

_impl = _kernels_np
_impl_name = "numpy"

if os.environ.get("PANOCUBE_PURE_PYTHON", "0") != "1":
    try:
        from . import _kernels_c

        _impl = _kernels_c
        _impl_name = "cython"
    except ImportError:
        pass


def active_implementation() -> str:
    """Name of the kernel backend in use: 'cython' or 'numpy'."""
    return _impl_name


def bilinear_gather(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                    wrap_cols: bool = False) -> np.ndarray:
    """Bilinear blend at fractional (row, col) positions of an (H, W, C) raster.

    Rows clamp to the raster; columns wrap when wrap_cols is set, else clamp.
    Returns (N, C).
    """
    raster = np.ascontiguousarray(raster, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    if raster.size == 0:
        raise ValueError("raster is empty")
    return _impl.bilinear_gather(raster, rows, cols, bool(wrap_cols))


def bilinear_gather_invalid(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                            wrap_cols: bool = False) -> np.ndarray:
    """Bilinear blend on an (H, W) raster where 0 marks invalid samples;
    interpolation touching an invalid texel returns 0. Returns (N,)."""
    raster = np.ascontiguousarray(raster, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    if raster.size == 0:
        raise ValueError("raster is empty")
    return _impl.bilinear_gather_invalid(raster, rows, cols, bool(wrap_cols))


def cubemap_gather(faces: np.ndarray, rt: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Sample a (6, w, w, C) cubemap along (N, 3) directions: canonical-order
    face selection then bilinear with per-face edge clamp. rt is the (6, 3, 3)
    stack of transposed face rotations. Returns (N, C)."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    rt = np.ascontiguousarray(rt, dtype=np.float64)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    return _impl.cubemap_gather(faces, rt, pts)


def cubemap_gather_table(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                         cols: np.ndarray) -> np.ndarray:
    """cubemap_gather with face selection already done: fidx is the (N,) face
    index per sample, rows/cols the fractional positions on that face."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    fidx = np.ascontiguousarray(fidx, dtype=np.int64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    return _impl.cubemap_gather_table(faces, fidx, rows, cols)


def cubemap_gather_table_invalid(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                 cols: np.ndarray) -> np.ndarray:
    """cubemap_gather_table for a (6, w, w) single-channel map with 0 = invalid."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    fidx = np.ascontiguousarray(fidx, dtype=np.int64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    return _impl.cubemap_gather_table_invalid(faces, fidx, rows, cols)


def cubemap_gather_invalid(faces: np.ndarray, rt: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """cubemap_gather for a (6, w, w) single-channel map with 0 = invalid;
    interpolation touching an invalid texel returns 0. Returns (N,)."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    rt = np.ascontiguousarray(rt, dtype=np.float64)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    return _impl.cubemap_gather_invalid(faces, rt, pts)


def bilinear_gather_sorted(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                           oidx: np.ndarray, wrap_cols: bool = False) -> np.ndarray:
    """bilinear_gather with a per-sample output index: row i of the result
    array is written at position oidx[i]. Callers sort samples by source
    position so reads stream through the raster."""
    raster = np.ascontiguousarray(raster, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    oidx = np.ascontiguousarray(oidx, dtype=np.int64)
    return _impl.bilinear_gather_sorted(raster, rows, cols, oidx, bool(wrap_cols))


def bilinear_gather_sorted_invalid(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                                   oidx: np.ndarray, wrap_cols: bool = False) -> np.ndarray:
    """bilinear_gather_invalid with a per-sample output index."""
    raster = np.ascontiguousarray(raster, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    oidx = np.ascontiguousarray(oidx, dtype=np.int64)
    return _impl.bilinear_gather_sorted_invalid(raster, rows, cols, oidx, bool(wrap_cols))


def cubemap_gather_table_sorted(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                cols: np.ndarray, oidx: np.ndarray) -> np.ndarray:
    """cubemap_gather_table with a per-sample output index."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    fidx = np.ascontiguousarray(fidx, dtype=np.int64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    oidx = np.ascontiguousarray(oidx, dtype=np.int64)
    return _impl.cubemap_gather_table_sorted(faces, fidx, rows, cols, oidx)


def cubemap_gather_table_sorted_invalid(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                        cols: np.ndarray, oidx: np.ndarray) -> np.ndarray:
    """cubemap_gather_table_invalid with a per-sample output index."""
    faces = np.ascontiguousarray(faces, dtype=np.float64)
    fidx = np.ascontiguousarray(fidx, dtype=np.int64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    oidx = np.ascontiguousarray(oidx, dtype=np.int64)
    return _impl.cubemap_gather_table_sorted_invalid(faces, fidx, rows, cols, oidx)


def equirect_warp_loss(ref: np.ndarray, tgt: np.ndarray, depth: np.ndarray,
                       rays: np.ndarray, rot: np.ndarray, trans: np.ndarray) -> float:
    """Fused equirect reconstruction loss: lift (N,) depths along (N, 3) rays,
    rigid-transform, project to the sphere, bilinearly warp the (H, 2H, C)
    target, and return mean |ref - warped| over valid pixels and channels."""
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    tgt = np.ascontiguousarray(tgt, dtype=np.float64)
    depth = np.ascontiguousarray(depth, dtype=np.float64).ravel()
    rays = np.ascontiguousarray(rays, dtype=np.float64)
    rot = np.ascontiguousarray(rot, dtype=np.float64)
    trans = np.ascontiguousarray(trans, dtype=np.float64).ravel()
    return float(_impl.equirect_warp_loss(ref, tgt, depth, rays, rot, trans))


def cubemap_warp_loss(ref: np.ndarray, tgt: np.ndarray, depth: np.ndarray,
                      rays: np.ndarray, rt: np.ndarray, rot: np.ndarray,
                      trans: np.ndarray) -> float:
    """Fused cubemap reconstruction loss: lift (N,) depths along (N, 3) rays,
    rigid-transform, face-select, bilinearly warp the (6, w, w, C) target, and
    return mean |ref - warped| over valid pixels and channels."""
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    tgt = np.ascontiguousarray(tgt, dtype=np.float64)
    depth = np.ascontiguousarray(depth, dtype=np.float64).ravel()
    rays = np.ascontiguousarray(rays, dtype=np.float64)
    rt = np.ascontiguousarray(rt, dtype=np.float64)
    rot = np.ascontiguousarray(rot, dtype=np.float64)
    trans = np.ascontiguousarray(trans, dtype=np.float64).ravel()
    return float(_impl.cubemap_warp_loss(ref, tgt, depth, rays, rt, rot, trans))
