"""Depth lifting and spherical inverse warping.

Depth samples are ray lengths (meters along the pixel's viewing ray), so
lifting is a pure scaling of the normalized grid rays. Because the image
domain is the full sphere, every finite 3D point projects back inside it:
the warp's validity mask equals the depth validity mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import PoseSE3, all_face_rays
from .projection import Cubemap, sample_cubemap


@dataclass(frozen=True)
class PointCloud:
    """Per-face, per-pixel 3D points in the reference camera frame.

    points: (6, w, w, 3) meters; valid: (6, w, w) bool.
    """

    points: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    @property
    def face_width(self) -> int:
        return self.points.shape[1]


@lru_cache(maxsize=32)
def normalized_face_rays(width: int) -> np.ndarray:
    """(6, w, w, 3) unit rays for all faces (cached, read-only)."""
    rays = all_face_rays(width)
    rays = rays / np.linalg.norm(rays, axis=-1, keepdims=True)
    rays.flags.writeable = False
    return rays


def depth_to_pointcloud(depth: Cubemap) -> PointCloud:
    """Lift a cubemap depth map to 3D points (the map Psi): each unit pixel
    ray scaled by its depth. Depth 0 marks invalid pixels."""
    if depth.channels != 1:
        raise ValueError("depth cubemap must have one channel")
    d = depth.faces[:, :, :, 0]
    if np.any(d < 0):
        raise ValueError("depth samples must be nonnegative (0 = invalid)")
    rays = normalized_face_rays(depth.face_width)
    return PointCloud(points=rays * d[..., None], valid=d > 0)


def transform_pointcloud(cloud: PointCloud, pose: PoseSE3) -> PointCloud:
    """Apply a rigid motion to every point; validity is preserved."""
    return PointCloud(points=pose.apply(cloud.points), valid=cloud.valid)


def warp_cubemap(cloud: PointCloud, target: Cubemap) -> tuple[Cubemap, np.ndarray]:
    """Inverse-warp the target cubemap onto the reference view (the map xi).

    Each reference pixel's 3D point (already transformed into the target
    camera frame) is projected onto the target sphere and sampled from the
    target cubemap by face selection + bilinear interpolation. Returns the
    warped cubemap and the (6, w, w) validity mask, which equals the point
    validity mask: no point ever projects outside the spherical domain.
    """
    w = cloud.face_width
    if target.face_width != w:
        raise ValueError("point cloud and target cubemap sizes differ")
    valid = cloud.valid
    if valid.all():
        warped = sample_cubemap(target, cloud.points)
    else:
        warped = np.zeros((6, w, w, target.channels), dtype=np.float64)
        pts = cloud.points[valid]
        if pts.size:
            warped[valid] = sample_cubemap(target, pts)
    return Cubemap(warped), valid.copy()


def warp_equirect(depth: np.ndarray, target: np.ndarray, pose: PoseSE3,
                  rays: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Equirect-domain counterpart of Psi + xi, used by the throughput
    benchmark: lift an (H, 2H) equirect depth, transform, project with the
    spherical equations and bilinearly sample the (H, 2H, C) target with
    longitude wrap. Returns (warped, valid)."""
    from .projection import bilinear_sample, equirect_rays, ray_to_sphere, sphere_to_pixel

    depth = np.asarray(depth, dtype=float)
    height = depth.shape[0]
    if rays is None:
        rays = equirect_rays(height)
    valid = depth > 0
    pts = pose.apply(rays * depth[..., None])
    warped = np.zeros(target.shape, dtype=np.float64)
    x, y = ray_to_sphere(pts[valid])
    rows, cols = sphere_to_pixel(x, y, height)
    warped[valid] = bilinear_sample(target, rows, cols, wrap_cols=True)
    return warped, valid


def write_ply(path, cloud: PointCloud, colors: Cubemap | None = None) -> None:
    """Export valid points as ascii PLY, with per-point RGB when given."""
    pts = cloud.points[cloud.valid]
    if colors is not None:
        rgb = colors.faces[cloud.valid]
        if rgb.shape[1] == 1:
            rgb = np.repeat(rgb, 3, axis=1)
        rgb = np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {pts.shape[0]}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if colors is not None:
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write("end_header\n")
        for i in range(pts.shape[0]):
            line = f"{pts[i, 0]:.9g} {pts[i, 1]:.9g} {pts[i, 2]:.9g}"
            if colors is not None:
                line += f" {rgb[i, 0]} {rgb[i, 1]} {rgb[i, 2]}"
            fh.write(line + "\n")
