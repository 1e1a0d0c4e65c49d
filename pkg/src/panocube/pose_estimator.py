"""Direct photometric pose estimation on cubemaps.

Minimizes a Huber-robustified photometric error between a reference cubemap
and a target cubemap warped through the reference depth, over the 6-dof rigid
motion. Damped least squares (Levenberg-Marquardt) with central-difference
residual Jacobians, coarse-to-fine over a cube-padded image pyramid.

The local motion parameterization is (axis-angle, translation) composed
multiplicatively on the left of the current estimate, which keeps the chart
centered at the identity every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube_padding import pad_channels
from .geometry import PoseSE3, rotvec_to_rotation
from .projection import Cubemap, sample_cubemap
from .warping import normalized_face_rays

_FD_STEP = 1e-5  # central-difference step per motion parameter


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 25
    init_damping: float = 1e-4
    damping_up: float = 10.0
    damping_down: float = 0.3
    step_tolerance: float = 1e-9
    huber_threshold: float = 0.1
    pyramid_levels: int = 3

    def __post_init__(self):
        if min(self.max_iterations, self.pyramid_levels) < 1:
            raise ValueError("iteration and pyramid counts must be >= 1")
        if min(self.init_damping, self.damping_up, self.damping_down,
               self.step_tolerance, self.huber_threshold) <= 0:
            raise ValueError("solver parameters must be positive")


def _perturb(pose: PoseSE3, delta: np.ndarray) -> PoseSE3:
    inc = PoseSE3(rotvec_to_rotation(delta[:3]), delta[3:])
    return inc.compose(pose)


def pose_jacobian_fd(objective, pose: PoseSE3, step: float) -> np.ndarray:
    """Central-difference gradient of a scalar objective with respect to the
    6 local motion parameters at the given pose."""
    if step <= 0:
        raise ValueError("step must be positive")
    grad = np.zeros(6)
    for k in range(6):
        delta = np.zeros(6)
        delta[k] = step
        grad[k] = (objective(_perturb(pose, delta))
                   - objective(_perturb(pose, -delta))) / (2.0 * step)
    return grad


def pyramid_down(faces: np.ndarray) -> np.ndarray:
    """Halve a (6, w, w, C) cubemap: cube-padded 3x3 binomial smoothing then
    2x2 block mean."""
    padded = pad_channels(faces, 1)
    k = np.array([0.25, 0.5, 0.25])
    sm = (padded[:, :-2] * k[0] + padded[:, 1:-1] * k[1] + padded[:, 2:] * k[2])
    sm = (sm[:, :, :-2] * k[0] + sm[:, :, 1:-1] * k[1] + sm[:, :, 2:] * k[2])
    w = faces.shape[1]
    blocks = sm.reshape(6, w // 2, 2, w // 2, 2, faces.shape[3])
    return blocks.mean(axis=(2, 4))


def pyramid_down_depth(faces: np.ndarray) -> np.ndarray:
    """Halve a (6, w, w, 1) depth cubemap: 2x2 mean over valid samples only
    (0 marks invalid)."""
    w = faces.shape[1]
    blocks = faces[:, :, :, 0].reshape(6, w // 2, 2, w // 2, 2)
    valid = blocks > 0
    count = valid.sum(axis=(2, 4))
    total = np.where(valid, blocks, 0.0).sum(axis=(2, 4))
    out = np.where(count > 0, total / np.maximum(count, 1), 0.0)
    return out[..., None]


def _huber_loss(res: np.ndarray, delta: float) -> float:
    a = np.abs(res)
    quad = a <= delta
    vals = np.where(quad, 0.5 * res ** 2, delta * (a - 0.5 * delta))
    return float(vals.mean())


def _huber_weights(res: np.ndarray, delta: float) -> np.ndarray:
    a = np.abs(res)
    return np.where(a <= delta, 1.0, delta / np.maximum(a, 1e-12))


class _Level:
    """One pyramid level: fixed rays, depth and reference intensities."""

    def __init__(self, ref: Cubemap, tgt: Cubemap, depth: np.ndarray):
        w = ref.face_width
        d = depth[:, :, :, 0]
        self.valid = d > 0
        rays = normalized_face_rays(w)
        self.points = rays[self.valid] * d[self.valid][:, None]
        self.ref_vals = ref.faces[self.valid]
        self.tgt = tgt

    def residuals(self, pose: PoseSE3) -> np.ndarray:
        warped = sample_cubemap(self.tgt, pose.apply(self.points))
        return (warped - self.ref_vals).ravel()


def _solve_level(level: _Level, pose: PoseSE3, cfg: SolverConfig,
                 history: list) -> tuple[PoseSE3, bool]:
    damping = cfg.init_damping
    res = level.residuals(pose)
    loss = _huber_loss(res, cfg.huber_threshold)
    converged = False

    for _ in range(cfg.max_iterations):
        if loss < 1e-30:  # exact match: nothing left to minimize
            history.append({"loss": loss, "damping": damping, "step_norm": 0.0})
            return pose, True
        jac = np.empty((res.shape[0], 6))
        for k in range(6):
            delta = np.zeros(6)
            delta[k] = _FD_STEP
            r_plus = level.residuals(_perturb(pose, delta))
            r_minus = level.residuals(_perturb(pose, -delta))
            jac[:, k] = (r_plus - r_minus) / (2.0 * _FD_STEP)

        weights = _huber_weights(res, cfg.huber_threshold)
        jw = jac * weights[:, None]
        hess = jw.T @ jac
        grad = jw.T @ res
        diag = np.maximum(np.diag(hess), 1e-12)

        accepted = False
        step_norm = 0.0
        while damping < 1e12:
            try:
                step = np.linalg.solve(hess + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                damping *= cfg.damping_up
                continue
            cand = _perturb(pose, step)
            cand_res = level.residuals(cand)
            cand_loss = _huber_loss(cand_res, cfg.huber_threshold)
            if cand_loss < loss:
                pose, res, loss = cand, cand_res, cand_loss
                step_norm = float(np.linalg.norm(step))
                damping = max(damping * cfg.damping_down, 1e-12)
                accepted = True
                break
            damping *= cfg.damping_up

        history.append({"loss": loss, "damping": damping, "step_norm": step_norm})
        if not accepted:
            return pose, converged
        if step_norm < cfg.step_tolerance:
            converged = True
            return pose, converged
    return pose, converged


def estimate_pose(ref: Cubemap, tgt: Cubemap, depth_ref: Cubemap,
                  init: PoseSE3 | None = None,
                  cfg: SolverConfig | None = None) -> tuple[PoseSE3, dict]:
    """Estimate the rigid motion taking reference-frame points into the
    target camera frame by direct photometric alignment.

    Returns (pose, report); report carries the per-iteration trace and the
    final pose, converged flag and iteration count.
    """
    cfg = cfg or SolverConfig()
    init = init or PoseSE3.identity()
    if ref.faces.shape != tgt.faces.shape:
        raise ValueError("reference and target cubemap shapes differ")
    if depth_ref.channels != 1 or depth_ref.face_width != ref.face_width:
        raise ValueError("depth cubemap inconsistent with images")
    d = depth_ref.faces[:, :, :, 0]
    if np.count_nonzero(d > 0) < 0.1 * d.size:
        raise ValueError("need valid depth on at least 10% of pixels")

    # coarse-to-fine image stack
    levels = [(ref.faces, tgt.faces, depth_ref.faces)]
    for _ in range(cfg.pyramid_levels - 1):
        rf, tf, df = levels[-1]
        if rf.shape[1] % 2 or rf.shape[1] <= 8:
            break
        levels.append((pyramid_down(rf), pyramid_down(tf), pyramid_down_depth(df)))

    pose = init
    history: list = []
    converged = False
    for rf, tf, df in reversed(levels):
        level = _Level(Cubemap(rf), Cubemap(tf), df)
        pose, converged = _solve_level(level, pose, cfg, history)

    report = {
        "iterations": history,
        "final": {
            "pose": pose.to_dict(),
            "converged": bool(converged),
            "iterations": len(history),
        },
    }
    return pose, report
