"""Self-supervision objectives: photometric consistency, pose consistency,
depth smoothness and explainability regularization, plus their weighted total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cube_padding import pad_channels
from .geometry import FACE_ORDER, Face, PoseSE3, face_rotation
from .projection import Cubemap, EquirectImage, _transposed_rotations, equirect_rays
from .warping import normalized_face_rays

# weights reported to balance the loss terms
DEFAULT_WEIGHTS = None  # set below, after LossWeights is defined


@dataclass(frozen=True)
class LossWeights:
    lambda_pose: float = 0.1
    lambda_sm: float = 0.04
    lambda_exp: float = 0.3

    def __post_init__(self):
        if min(self.lambda_pose, self.lambda_sm, self.lambda_exp) < 0:
            raise ValueError("loss weights must be nonnegative")


DEFAULT_WEIGHTS = LossWeights()


def photometric_loss(ref: Cubemap, warped: Cubemap, valid: np.ndarray,
                     mask: Cubemap | None = None) -> float:
    """Mean over valid pixels (and channels) of mask * |ref - warped|."""
    if ref.faces.shape != warped.faces.shape:
        raise ValueError("reference and warped cubemap shapes differ")
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != ref.faces.shape[:3]:
        raise ValueError("validity mask shape mismatch")
    n = int(np.count_nonzero(valid))
    if n == 0:
        return 0.0
    if mask is None and n == valid.size:
        return float(np.abs(ref.faces - warped.faces).mean())
    diff = np.abs(ref.faces[valid] - warped.faces[valid])
    if mask is not None:
        m = mask.faces[:, :, :, 0]
        if m.shape != valid.shape:
            raise ValueError("explainability mask shape mismatch")
        diff = diff * m[valid][:, None]
    return float(diff.mean())


def reconstruction_loss_cubemap(ref: Cubemap, target: Cubemap, depth: Cubemap,
                                pose: PoseSE3) -> float:
    """Photometric reconstruction loss of the full cubemap pipeline in one
    fused pass (lift + transform + warp + mean abs diff), numerically
    equivalent to composing depth_to_pointcloud, transform_pointcloud,
    warp_cubemap and photometric_loss but without materializing the
    intermediate point cloud and warped image."""
    if ref.faces.shape != target.faces.shape:
        raise ValueError("reference and target cubemap shapes differ")
    if depth.channels != 1 or depth.face_width != ref.face_width:
        raise ValueError("depth cubemap must be single-channel at the image size")
    if np.any(depth.faces < 0):
        raise ValueError("depth samples must be nonnegative (0 = invalid)")
    rays = normalized_face_rays(depth.face_width).reshape(-1, 3)
    return kernels.cubemap_warp_loss(
        ref.faces.reshape(-1, ref.channels), target.faces,
        depth.faces.reshape(-1), rays, _transposed_rotations(),
        pose.rotation, pose.translation)


def reconstruction_loss_equirect(ref: EquirectImage, target: EquirectImage,
                                 depth: EquirectImage, pose: PoseSE3) -> float:
    """Photometric reconstruction loss computed directly on the sphere in one
    fused pass: the equirect counterpart of reconstruction_loss_cubemap."""
    if ref.data.shape != target.data.shape:
        raise ValueError("reference and target raster shapes differ")
    if depth.channels != 1 or depth.height != ref.height:
        raise ValueError("depth raster must be single-channel at the image size")
    if np.any(depth.data < 0):
        raise ValueError("depth samples must be nonnegative (0 = invalid)")
    rays = equirect_rays(depth.height).reshape(-1, 3)
    return kernels.equirect_warp_loss(
        ref.data.reshape(-1, ref.channels), target.data,
        depth.data.reshape(-1), rays, pose.rotation, pose.translation)


def transform_pose_to_front(pose: PoseSE3, face: Face) -> PoseSE3:
    """Express a per-face relative pose in the front face's coordinates:
    (Rc^T R Rc, Rc^T T) with Rc the face rotation."""
    rc = face_rotation(Face(face))
    return PoseSE3(rc.T @ pose.rotation @ rc, rc.T @ pose.translation)


def replicate_pose_per_face(pose: PoseSE3) -> dict:
    """Per-face poses that all map back to the given front pose under
    transform_pose_to_front (inverse conjugation): (Rc R Rc^T, Rc T)."""
    out = {}
    for f in FACE_ORDER:
        rc = face_rotation(f)
        out[f] = PoseSE3(rc @ pose.rotation @ rc.T, rc @ pose.translation)
    return out


def pose_consistency_loss(poses: dict) -> float:
    """Spread of the six per-face motions after moving them into the front
    frame: each pose is encoded as a 6-vector (axis-angle, translation), and
    the scalar loss is sqrt(mean over components of the population variance
    across the six faces)."""
    if set(poses) != set(FACE_ORDER):
        raise ValueError("need exactly one pose per face")
    vecs = np.stack([
        transform_pose_to_front(poses[f], f).as_vector() for f in FACE_ORDER
    ])
    var = np.mean((vecs - vecs.mean(axis=0)) ** 2, axis=0)  # /6, population form
    return float(np.sqrt(var.mean()))


def smoothness_loss(depth: Cubemap) -> float:
    """Mean absolute 5-point discrete Laplacian of depth over all pixels,
    with cross-face neighbors supplied by cube padding."""
    if depth.channels != 1:
        raise ValueError("depth cubemap must have one channel")
    padded = pad_channels(depth.faces, 1)[:, :, :, 0]
    center = padded[:, 1:-1, 1:-1]
    lap = (padded[:, :-2, 1:-1] + padded[:, 2:, 1:-1]
           + padded[:, 1:-1, :-2] + padded[:, 1:-1, 2:] - 4.0 * center)
    return float(np.abs(lap).mean())


def explainability_loss(mask: Cubemap) -> float:
    """Cross-entropy against a constant 'one' label: -mean log(mask)."""
    m = mask.faces
    if np.any(m <= 0):
        raise ValueError("explainability mask must be > 0 everywhere")
    if np.any(m > 1):
        raise ValueError("explainability mask must be <= 1")
    return float(-np.log(m).mean())


def total_loss(rec: float, pose: float, sm: float, exp: float,
               weights: LossWeights = DEFAULT_WEIGHTS) -> float:
    """rec + lambda_pose * pose + lambda_sm * sm + lambda_exp * exp."""
    parts = (rec, pose, sm, exp)
    if not all(np.isfinite(parts)):
        raise ValueError("loss terms must be finite")
    return float(rec + weights.lambda_pose * pose + weights.lambda_sm * sm
                 + weights.lambda_exp * exp)


def loss_report(rec: float, pose: float, sm: float, exp: float,
                weights: LossWeights = DEFAULT_WEIGHTS) -> dict:
    """JSON-ready record {rec, pose, sm, exp, total, weights}."""
    return {
        "rec": float(rec),
        "pose": float(pose),
        "sm": float(sm),
        "exp": float(exp),
        "total": total_loss(rec, pose, sm, exp, weights),
        "weights": {
            "lambda_pose": weights.lambda_pose,
            "lambda_sm": weights.lambda_sm,
            "lambda_exp": weights.lambda_exp,
        },
    }
