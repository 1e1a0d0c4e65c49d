"""Pure-numpy bilinear gather kernels (fallback for the compiled extension)."""

from __future__ import annotations

import numpy as np


def _corner_indices(rows, cols, height, width, wrap_cols):
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    fr = rows - r0
    fc = cols - c0
    r1 = r0 + 1
    c1 = c0 + 1
    r0 = np.clip(r0, 0, height - 1)
    r1 = np.clip(r1, 0, height - 1)
    if wrap_cols:
        c0 %= width
        c1 %= width
    else:
        c0 = np.clip(c0, 0, width - 1)
        c1 = np.clip(c1, 0, width - 1)
    return r0, r1, c0, c1, fr, fc


def bilinear_gather(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                    wrap_cols: bool) -> np.ndarray:
    """4-neighbor bilinear blend; rows clamp, cols wrap or clamp.

    raster: (H, W, C) float64, rows/cols: (N,) float64 -> (N, C) float64.
    """
    height, width, _ = raster.shape
    r0, r1, c0, c1, fr, fc = _corner_indices(rows, cols, height, width, wrap_cols)
    fr = fr[:, None]
    fc = fc[:, None]
    top = raster[r0, c0] * (1.0 - fc) + raster[r0, c1] * fc
    bot = raster[r1, c0] * (1.0 - fc) + raster[r1, c1] * fc
    return top * (1.0 - fr) + bot * fr


def bilinear_gather_invalid(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                            wrap_cols: bool) -> np.ndarray:
    """Like bilinear_gather on a (H, W) raster, but any touched 0 texel poisons
    the output to 0 (invalid-depth propagation)."""
    height, width = raster.shape
    r0, r1, c0, c1, fr, fc = _corner_indices(rows, cols, height, width, wrap_cols)
    v00 = raster[r0, c0]
    v01 = raster[r0, c1]
    v10 = raster[r1, c0]
    v11 = raster[r1, c1]
    out = (v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr) + (v10 * (1.0 - fc) + v11 * fc) * fr
    bad = (v00 == 0.0) | (v01 == 0.0) | (v10 == 0.0) | (v11 == 0.0)
    out[bad] = 0.0
    return out


def cubemap_gather(faces: np.ndarray, rt: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Sample a (6, w, w, C) cubemap along (N, 3) directions: first face in
    canonical order whose closed frustum contains the direction, then bilinear
    with edge clamp. rt holds the six transposed face rotations."""
    local = np.einsum("nk,fjk->fnj", pts, rt)
    x, y, z = local[..., 0], local[..., 1], local[..., 2]
    contained = (z > 0) & (np.abs(x) <= z) & (np.abs(y) <= z)
    choice = np.argmax(contained, axis=0)
    none = ~np.any(contained, axis=0)
    if np.any(none):
        score = z - np.maximum(np.abs(x), np.abs(y))
        choice = np.where(none, np.argmax(score, axis=0), choice)
    w = faces.shape[1]
    half = w / 2.0
    n = pts.shape[0]
    sel = np.arange(n)
    lx = x[choice, sel]
    ly = y[choice, sel]
    lz = z[choice, sel]
    cols = lx / lz * half + half - 0.5
    rows = ly / lz * half + half - 0.5
    out = np.empty((n, faces.shape[3]), dtype=np.float64)
    for f in range(6):
        m = choice == f
        if np.any(m):
            out[m] = bilinear_gather(faces[f], rows[m], cols[m], False)
    return out


def cubemap_gather_table(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                         cols: np.ndarray) -> np.ndarray:
    """Bilinear cubemap sampling with precomputed face indices and per-face
    fractional (row, col) positions (a frozen face-selection table)."""
    n = fidx.shape[0]
    out = np.empty((n, faces.shape[3]), dtype=np.float64)
    for f in range(6):
        m = fidx == f
        if np.any(m):
            out[m] = bilinear_gather(faces[f], rows[m], cols[m], False)
    return out


def cubemap_gather_table_invalid(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                 cols: np.ndarray) -> np.ndarray:
    """cubemap_gather_table on a (6, w, w) single-channel cubemap where any
    touched 0 texel poisons the sample to 0."""
    n = fidx.shape[0]
    out = np.empty(n, dtype=np.float64)
    for f in range(6):
        m = fidx == f
        if np.any(m):
            out[m] = bilinear_gather_invalid(faces[f], rows[m], cols[m], False)
    return out


def cubemap_gather_invalid(faces: np.ndarray, rt: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """cubemap_gather on a (6, w, w) single-channel cubemap where any touched
    0 texel poisons the sample to 0."""
    local = np.einsum("nk,fjk->fnj", pts, rt)
    x, y, z = local[..., 0], local[..., 1], local[..., 2]
    contained = (z > 0) & (np.abs(x) <= z) & (np.abs(y) <= z)
    choice = np.argmax(contained, axis=0)
    none = ~np.any(contained, axis=0)
    if np.any(none):
        score = z - np.maximum(np.abs(x), np.abs(y))
        choice = np.where(none, np.argmax(score, axis=0), choice)
    w = faces.shape[1]
    half = w / 2.0
    n = pts.shape[0]
    sel = np.arange(n)
    lz = z[choice, sel]
    cols = x[choice, sel] / lz * half + half - 0.5
    rows = y[choice, sel] / lz * half + half - 0.5
    out = np.empty(n, dtype=np.float64)
    for f in range(6):
        m = choice == f
        if np.any(m):
            out[m] = bilinear_gather_invalid(faces[f], rows[m], cols[m], False)
    return out


def equirect_warp_loss(ref: np.ndarray, tgt: np.ndarray, depth: np.ndarray,
                       rays: np.ndarray, rot: np.ndarray, trans: np.ndarray) -> float:
    """Fused lift + rigid transform + spherical projection + bilinear warp +
    photometric mean for an equirect pair. ref/depth/rays are flattened
    (N, C)/(N,)/(N, 3) over the (H, 2H) raster; tgt keeps its 2D layout."""
    height, width, _ = tgt.shape
    valid = depth > 0
    if not np.any(valid):
        return 0.0
    pts = (rays[valid] * depth[valid][:, None]) @ rot.T + trans
    norm = np.linalg.norm(pts, axis=-1)
    keep = norm > 0
    pts, norm = pts[keep], norm[keep]
    if pts.shape[0] == 0:
        return 0.0
    lon_n = np.arctan2(pts[:, 0], pts[:, 2]) / np.pi
    lat_n = np.arcsin(np.clip(pts[:, 1] / norm, -1.0, 1.0)) / (0.5 * np.pi)
    cols = (lon_n + 1.0) / 2.0 * width - 0.5
    rows = np.clip((lat_n + 1.0) / 2.0 * height - 0.5, 0.0, height - 1.0)
    warped = bilinear_gather(tgt, rows, cols, True)
    return float(np.abs(ref[valid][keep] - warped).mean())


def cubemap_warp_loss(ref: np.ndarray, tgt: np.ndarray, depth: np.ndarray,
                      rays: np.ndarray, rt: np.ndarray, rot: np.ndarray,
                      trans: np.ndarray) -> float:
    """Fused lift + rigid transform + face selection + bilinear warp +
    photometric mean for a cubemap pair. ref/depth/rays are flattened
    (N, C)/(N,)/(N, 3) over the (6, w, w) faces; tgt keeps its face layout."""
    valid = depth > 0
    if not np.any(valid):
        return 0.0
    pts = (rays[valid] * depth[valid][:, None]) @ rot.T + trans
    warped = cubemap_gather(tgt, rt, np.ascontiguousarray(pts))
    return float(np.abs(ref[valid] - warped).mean())


def bilinear_gather_sorted(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                           oidx: np.ndarray, wrap_cols: bool) -> np.ndarray:
    """bilinear_gather with an output index per sample (sorted-schedule form)."""
    out = np.empty((rows.shape[0], raster.shape[2]), dtype=np.float64)
    out[oidx] = bilinear_gather(raster, rows, cols, wrap_cols)
    return out


def bilinear_gather_sorted_invalid(raster: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                                   oidx: np.ndarray, wrap_cols: bool) -> np.ndarray:
    """bilinear_gather_invalid with an output index per sample."""
    out = np.empty(rows.shape[0], dtype=np.float64)
    out[oidx] = bilinear_gather_invalid(raster, rows, cols, wrap_cols)
    return out


def cubemap_gather_table_sorted(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                cols: np.ndarray, oidx: np.ndarray) -> np.ndarray:
    """cubemap_gather_table with an output index per sample."""
    out = np.empty((fidx.shape[0], faces.shape[3]), dtype=np.float64)
    out[oidx] = cubemap_gather_table(faces, fidx, rows, cols)
    return out


def cubemap_gather_table_sorted_invalid(faces: np.ndarray, fidx: np.ndarray, rows: np.ndarray,
                                        cols: np.ndarray, oidx: np.ndarray) -> np.ndarray:
    """cubemap_gather_table_invalid with an output index per sample."""
    out = np.empty(fidx.shape[0], dtype=np.float64)
    out[oidx] = cubemap_gather_table_invalid(faces, fidx, rows, cols)
    return out
