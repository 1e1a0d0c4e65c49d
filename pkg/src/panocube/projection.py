"""Pixel <-> sphere mapping and equirectangular <-> cubemap conversion.

Normalized spherical coordinates follow
    X = atan2(x, z) / pi            (longitude, in [-1, 1), wraps mod 2)
    Y = arcsin(y / |p|) / (pi/2)    (latitude, in [-1, 1], clamps)
with longitude 0 at the horizontal center of the panorama.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .geometry import FACE_ORDER, Face, all_face_rays, face_of_direction, face_rotation


@lru_cache(maxsize=8)
def _transposed_rotations() -> np.ndarray:
    rt = np.stack([face_rotation(f).T for f in FACE_ORDER])
    rt.flags.writeable = False
    return rt


@dataclass(frozen=True)
class EquirectImage:
    """2:1 equirectangular raster, data shape (height, 2*height, channels)."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ValueError(f"expected (H, W, C) raster, got shape {data.shape}")
        h, w, _ = data.shape
        if w != 2 * h:
            raise ValueError(f"equirect width must be 2x height, got {w}x{h}")
        if not np.all(np.isfinite(data)):
            raise ValueError("equirect samples must be finite")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class Cubemap:
    """Six square face rasters, faces shape (6, w, w, channels) in canonical
    (B, D, F, L, R, U) order."""

    faces: np.ndarray = field(repr=False)

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=np.float64)
        if faces.ndim == 3:
            faces = faces[:, :, :, None]
        if faces.ndim != 4 or faces.shape[0] != 6 or faces.shape[1] != faces.shape[2]:
            raise ValueError(f"expected (6, w, w, C) faces, got shape {faces.shape}")
        if not np.all(np.isfinite(faces)):
            raise ValueError("cubemap samples must be finite")
        object.__setattr__(self, "faces", faces)

    @property
    def face_width(self) -> int:
        return self.faces.shape[1]

    @property
    def channels(self) -> int:
        return self.faces.shape[3]

    def face(self, f: Face) -> np.ndarray:
        return self.faces[Face(f).value]

    @classmethod
    def constant(cls, face_width: int, channels: int, value: float = 0.0) -> "Cubemap":
        return cls(np.full((6, face_width, face_width, channels), float(value)))


def wrap_lon(x: np.ndarray) -> np.ndarray:
    """Wrap normalized longitude into [-1, 1)."""
    return np.mod(np.asarray(x, dtype=float) + 1.0, 2.0) - 1.0


def ray_to_sphere(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized spherical coords (X, Y) of (..., 3) rays."""
    p = np.asarray(p, dtype=float)
    norm = np.linalg.norm(p, axis=-1)
    if np.any(norm == 0.0):
        raise ValueError("cannot project the zero vector")
    x = np.arctan2(p[..., 0], p[..., 2]) / np.pi
    y = np.arcsin(np.clip(p[..., 1] / norm, -1.0, 1.0)) / (0.5 * np.pi)
    return x, y


def sphere_to_pixel(x: np.ndarray, y: np.ndarray, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Fractional (row, col) on an equirect raster. Columns carry the raw
    (possibly out-of-range) value; the bilinear sampler wraps them. Rows clamp."""
    width = 2 * height
    col = (np.asarray(x, dtype=float) + 1.0) / 2.0 * width - 0.5
    row = np.clip((np.asarray(y, dtype=float) + 1.0) / 2.0 * height - 0.5, 0.0, height - 1.0)
    return row, col


def pixel_to_direction(rows: np.ndarray, cols: np.ndarray, height: int) -> np.ndarray:
    """Unit rays for fractional equirect pixel positions, inverse of
    ray_to_sphere ∘ sphere_to_pixel."""
    width = 2 * height
    lon = ((np.asarray(cols, dtype=float) + 0.5) / width * 2.0 - 1.0) * np.pi
    lat = ((np.asarray(rows, dtype=float) + 0.5) / height * 2.0 - 1.0) * (0.5 * np.pi)
    cos_lat = np.cos(lat)
    return np.stack([cos_lat * np.sin(lon), np.sin(lat), cos_lat * np.cos(lon)], axis=-1)


@lru_cache(maxsize=16)
def equirect_rays(height: int) -> np.ndarray:
    """(H, 2H, 3) unit rays at every equirect pixel center (cached, read-only)."""
    rows, cols = np.meshgrid(np.arange(height), np.arange(2 * height), indexing="ij")
    rays = pixel_to_direction(rows, cols, height)
    rays.flags.writeable = False
    return rays


@lru_cache(maxsize=16)
def _equi2cube_table(height: int, face_width: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed equirect sample schedule for every cube-face pixel, sorted by
    source raster position so the gather streams through the source; the
    third array maps each scheduled sample back to its output pixel."""
    rays = all_face_rays(face_width)
    x, y = ray_to_sphere(rays)
    rows, cols = sphere_to_pixel(x, y, height)
    rows = rows.ravel()
    cols = cols.ravel()
    # schedule gathers by 64x64 source blocks (stable, so output order is kept
    # within each block): streams the source while keeping writes local, since
    # the conversion map is continuous
    block = 64
    r_blk = np.floor(rows).astype(np.int64) // block
    c_blk = (np.floor(cols).astype(np.int64) % (2 * height)) // block
    key = r_blk * (2 * height // block + 1) + c_blk
    oidx = np.argsort(key, kind="stable").astype(np.int64)
    rows = np.ascontiguousarray(rows[oidx])
    cols = np.ascontiguousarray(cols[oidx])
    for arr in (rows, cols, oidx):
        arr.flags.writeable = False
    return rows, cols, oidx


def _face_coords(dirs: np.ndarray, face_width: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Select a face per (N, 3) direction (first containing frustum in
    canonical order) and return (face_idx, rows, cols) on that face."""
    rt = _transposed_rotations()
    local = np.einsum("nk,fjk->fnj", dirs, rt)
    x, y, z = local[..., 0], local[..., 1], local[..., 2]
    contained = (z > 0) & (np.abs(x) <= z) & (np.abs(y) <= z)
    choice = np.argmax(contained, axis=0)
    none = ~np.any(contained, axis=0)
    if np.any(none):
        score = z - np.maximum(np.abs(x), np.abs(y))
        choice = np.where(none, np.argmax(score, axis=0), choice)
    sel = np.arange(dirs.shape[0])
    lz = z[choice, sel]
    half = face_width / 2.0
    cols = x[choice, sel] / lz * half + half - 0.5
    rows = y[choice, sel] / lz * half + half - 0.5
    return choice.astype(np.int64), rows, cols


@lru_cache(maxsize=16)
def _cube2equi_table(face_width: int, height: int
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Fixed cubemap sample schedule (face, row, col) for every equirect pixel
    center, sorted by source face position for streaming reads; the fourth
    array maps each scheduled sample back to its output pixel."""
    dirs = equirect_rays(height).reshape(-1, 3)
    fidx, rows, cols = _face_coords(dirs, face_width)
    # coarse 64x64 source-block schedule, as in _equi2cube_table
    block = 64
    nblk = face_width // block + 1
    r_blk = np.clip(np.floor(rows).astype(np.int64), 0, face_width - 1) // block
    c_blk = np.clip(np.floor(cols).astype(np.int64), 0, face_width - 1) // block
    key = (fidx * nblk + r_blk) * nblk + c_blk
    oidx = np.argsort(key, kind="stable").astype(np.int64)
    fidx = np.ascontiguousarray(fidx[oidx])
    rows = np.ascontiguousarray(rows[oidx])
    cols = np.ascontiguousarray(cols[oidx])
    for arr in (fidx, rows, cols, oidx):
        arr.flags.writeable = False
    return fidx, rows, cols, oidx


def bilinear_sample(raster: np.ndarray, rows, cols, wrap_cols: bool = False) -> np.ndarray:
    """Sample an (H, W) or (H, W, C) raster at fractional positions."""
    raster = np.asarray(raster, dtype=float)
    squeeze = raster.ndim == 2
    if squeeze:
        raster = raster[:, :, None]
    rows = np.asarray(rows, dtype=float)
    out = kernels.bilinear_gather(raster, rows.ravel(), np.asarray(cols, dtype=float).ravel(),
                                  wrap_cols)
    out = out.reshape(rows.shape + (raster.shape[2],))
    return out[..., 0] if squeeze else out


def equirect_to_cubemap(src: EquirectImage, face_width: int,
                        invalid_zero: bool = False) -> Cubemap:
    """Project an equirect raster onto the six cube faces (the map Phi).

    invalid_zero treats 0 as an invalid-depth marker: interpolation touching
    an invalid texel yields 0 (only meaningful for single-channel rasters).
    """
    if face_width < 2:
        raise ValueError(f"face width must be >= 2, got {face_width}")
    rows, cols, oidx = _equi2cube_table(src.height, face_width)
    if invalid_zero:
        if src.channels != 1:
            raise ValueError("invalid_zero requires a single-channel raster")
        out = kernels.bilinear_gather_sorted_invalid(src.data[:, :, 0], rows, cols,
                                                     oidx, wrap_cols=True)
        faces = out.reshape(6, face_width, face_width, 1)
    else:
        out = kernels.bilinear_gather_sorted(src.data, rows, cols, oidx,
                                             wrap_cols=True)
        faces = out.reshape(6, face_width, face_width, src.channels)
    return Cubemap(faces)


def cubemap_face_pixels(dirs: np.ndarray, faces_idx: np.ndarray, face_width: int
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Fractional (row, col) on the selected face for each direction."""
    dirs = np.asarray(dirs, dtype=float)
    rows = np.empty(dirs.shape[:-1], dtype=float)
    cols = np.empty(dirs.shape[:-1], dtype=float)
    half = face_width / 2.0
    for f in FACE_ORDER:
        sel = faces_idx == f.value
        if not np.any(sel):
            continue
        local = dirs[sel] @ face_rotation(f)
        z = local[:, 2]
        cols[sel] = local[:, 0] / z * half + half - 0.5
        rows[sel] = local[:, 1] / z * half + half - 0.5
    return rows, cols


def sample_cubemap(cube: Cubemap, dirs: np.ndarray,
                   invalid_zero: bool = False) -> np.ndarray:
    """Sample a cubemap along (..., 3) directions: face-select then bilinear
    with per-face edge clamp."""
    dirs = np.asarray(dirs, dtype=float)
    flat = dirs.reshape(-1, 3)
    rt = _transposed_rotations()
    if invalid_zero:
        if cube.channels != 1:
            raise ValueError("invalid_zero requires a single-channel cubemap")
        out = kernels.cubemap_gather_invalid(cube.faces[:, :, :, 0], rt, flat)[:, None]
    else:
        out = kernels.cubemap_gather(cube.faces, rt, flat)
    return out.reshape(dirs.shape[:-1] + (cube.channels,))


def cubemap_to_equirect(src: Cubemap, height: int,
                        invalid_zero: bool = False) -> EquirectImage:
    """Resample a cubemap back onto an equirect raster (the map Phi^-1):
    nearest-face single-face bilinear sampling, edge clamp at face borders."""
    if height < 2:
        raise ValueError(f"height must be >= 2, got {height}")
    if invalid_zero and src.channels != 1:
        raise ValueError("invalid_zero requires a single-channel cubemap")
    fidx, rows, cols, oidx = _cube2equi_table(src.face_width, height)
    if invalid_zero:
        out = kernels.cubemap_gather_table_sorted_invalid(src.faces[:, :, :, 0], fidx,
                                                          rows, cols, oidx)[:, None]
    else:
        out = kernels.cubemap_gather_table_sorted(src.faces, fidx, rows, cols, oidx)
    return EquirectImage(out.reshape(height, 2 * height, src.channels))
