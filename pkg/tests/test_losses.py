"""Training objectives: photometric, pose consistency, smoothness,
explainability, weighted total, and the fused reconstruction losses."""

import math

import numpy as np
import pytest

from panocube.cube_padding import pad_channels
from panocube.geometry import FACE_ORDER, Face, PoseSE3, face_rotation
from panocube.losses import (DEFAULT_WEIGHTS, LossWeights, explainability_loss,
                             loss_report, photometric_loss,
                             pose_consistency_loss,
                             reconstruction_loss_cubemap,
                             reconstruction_loss_equirect,
                             replicate_pose_per_face, smoothness_loss,
                             total_loss, transform_pose_to_front)
from panocube.projection import Cubemap, EquirectImage
from panocube.synthetic import random_scene, render_equirect
from panocube.warping import (depth_to_pointcloud, transform_pointcloud,
                              warp_cubemap, warp_equirect)
from conftest import random_pose, render_pair


# ---------------------------------------------------------------------------
# photometric
# ---------------------------------------------------------------------------

def test_photometric_zero_when_equal(rng):
    img = Cubemap(rng.uniform(size=(6, 8, 8, 3)))
    valid = np.ones((6, 8, 8), dtype=bool)
    assert photometric_loss(img, img, valid) == 0.0


def test_photometric_zero_mask(rng):
    ref = Cubemap(rng.uniform(size=(6, 4, 4, 3)))
    warped = Cubemap(rng.uniform(size=(6, 4, 4, 3)))
    valid = np.ones((6, 4, 4), dtype=bool)
    zeros = Cubemap.constant(4, 1, 0.0)
    assert photometric_loss(ref, warped, valid, zeros) == 0.0


def test_photometric_constant_difference():
    ref = Cubemap.constant(4, 3, 0.2)
    warped = Cubemap.constant(4, 3, 0.5)
    valid = np.ones((6, 4, 4), dtype=bool)
    assert abs(photometric_loss(ref, warped, valid) - 0.3) < 1e-15


def test_photometric_shape_mismatch():
    with pytest.raises(ValueError):
        photometric_loss(Cubemap.constant(4, 3, 0), Cubemap.constant(8, 3, 0),
                         np.ones((6, 4, 4), dtype=bool))


def test_photometric_normalizes_by_valid_count(rng):
    ref = Cubemap(rng.uniform(size=(6, 4, 4, 1)))
    warped = Cubemap(ref.faces + 0.25)
    valid = np.zeros((6, 4, 4), dtype=bool)
    valid[2, :2] = True  # 8 valid pixels out of 96
    assert abs(photometric_loss(ref, warped, valid) - 0.25) < 1e-12


def test_photometric_matches_scalar_oracle(rng):
    ref = Cubemap(rng.uniform(size=(6, 4, 4, 3)))
    warped = Cubemap(rng.uniform(size=(6, 4, 4, 3)))
    valid = rng.uniform(size=(6, 4, 4)) < 0.7
    mask = Cubemap(rng.uniform(0.1, 1.0, size=(6, 4, 4, 1)))
    total, count = 0.0, 0
    for f in range(6):
        for r in range(4):
            for c in range(4):
                if not valid[f, r, c]:
                    continue
                for ch in range(3):
                    total += mask.faces[f, r, c, 0] * abs(
                        ref.faces[f, r, c, ch] - warped.faces[f, r, c, ch])
                    count += 1
    want = total / count
    assert abs(photometric_loss(ref, warped, valid, mask) - want) < 1e-9


# ---------------------------------------------------------------------------
# pose consistency
# ---------------------------------------------------------------------------

def test_transform_pose_to_front_front_is_identity_map(rng):
    p = random_pose(rng)
    q = transform_pose_to_front(p, Face.FRONT)
    assert np.allclose(q.rotation, p.rotation, atol=1e-12)
    assert np.allclose(q.translation, p.translation, atol=1e-12)


def test_transform_pose_to_front_identity_pose():
    for f in FACE_ORDER:
        q = transform_pose_to_front(PoseSE3.identity(), f)
        assert np.allclose(q.rotation, np.eye(3), atol=1e-12)
        assert np.allclose(q.translation, 0.0, atol=1e-12)


def test_conjugation_roundtrip(rng):
    p = random_pose(rng)
    rc = face_rotation(Face.RIGHT)
    pushed = PoseSE3(rc @ p.rotation @ rc.T, rc @ p.translation)
    back = transform_pose_to_front(pushed, Face.RIGHT)
    assert np.allclose(back.rotation, p.rotation, atol=1e-9)
    assert np.allclose(back.translation, p.translation, atol=1e-9)


def test_pose_consistency_null(rng):
    p = random_pose(rng, max_angle=0.5)
    assert pose_consistency_loss(replicate_pose_per_face(p)) <= 1e-9
    idents = {f: PoseSE3.identity() for f in FACE_ORDER}
    assert pose_consistency_loss(idents) == 0.0


def test_pose_consistency_translation_oracle():
    # front-frame values (0, 0, +-eps) alternating, zero rotations
    eps = 0.06
    poses = {}
    for i, f in enumerate(FACE_ORDER):
        t_front = np.array([0.0, 0.0, eps if i % 2 == 0 else -eps])
        rc = face_rotation(f)
        poses[f] = PoseSE3(np.eye(3), rc @ t_front)
    # oracle: 6x6 matrix of encoded vectors, population std over rows,
    # RMS over components
    vecs = np.zeros((6, 6))
    for i in range(6):
        vecs[i, 5] = eps if i % 2 == 0 else -eps
    var = ((vecs - vecs.mean(axis=0)) ** 2).mean(axis=0)
    want = math.sqrt(var.mean())
    assert abs(pose_consistency_loss(poses) - want) < 1e-12


def test_pose_consistency_sensitivity(rng):
    p = random_pose(rng, max_angle=0.3, max_trans=0.2)
    poses = replicate_pose_per_face(p)
    bumped = poses[Face.LEFT]
    poses[Face.LEFT] = PoseSE3(
        bumped.rotation @ np.array(
            [[math.cos(0.01), -math.sin(0.01), 0],
             [math.sin(0.01), math.cos(0.01), 0],
             [0, 0, 1]]),
        bumped.translation)
    assert pose_consistency_loss(poses) > 1e-4


def test_pose_consistency_requires_all_faces():
    with pytest.raises(ValueError):
        pose_consistency_loss({Face.FRONT: PoseSE3.identity()})


# ---------------------------------------------------------------------------
# smoothness
# ---------------------------------------------------------------------------

def test_smoothness_constant_zero():
    assert smoothness_loss(Cubemap.constant(8, 1, 2.5)) == 0.0


def test_smoothness_linear_ramp_interior():
    # affine field on one face: interior Laplacian vanishes
    w = 8
    faces = np.full((6, w, w, 1), 1.0)
    ramp = np.arange(w, dtype=float)[None, :] * 0.1 + 1.0
    faces[2, :, :, 0] = ramp
    padded = pad_channels(faces, 1)[2, :, :, 0]
    lap = (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2]
           + padded[1:-1, 2:] - 4 * padded[1:-1, 1:-1])
    assert np.max(np.abs(lap[1:-1, 1:-1])) < 1e-12


def test_smoothness_matches_brute_force(rng):
    w = 8
    depth = Cubemap(rng.uniform(0.5, 3.0, size=(6, w, w, 1)))
    padded = pad_channels(depth.faces, 1)[:, :, :, 0]
    total = 0.0
    for f in range(6):
        for r in range(1, w + 1):
            for c in range(1, w + 1):
                lap = (padded[f, r - 1, c] + padded[f, r + 1, c]
                       + padded[f, r, c - 1] + padded[f, r, c + 1]
                       - 4.0 * padded[f, r, c])
                total += abs(lap)
    want = total / (6 * w * w)
    assert abs(smoothness_loss(depth) - want) < 1e-9


def test_smoothness_shift_invariance_and_homogeneity(rng):
    d = rng.uniform(0.5, 2.0, size=(6, 8, 8, 1))
    base = smoothness_loss(Cubemap(d))
    assert abs(smoothness_loss(Cubemap(d + 5.0)) - base) < 1e-9
    assert abs(smoothness_loss(Cubemap(d * 2.0)) - 2.0 * base) < 1e-9


# ---------------------------------------------------------------------------
# explainability
# ---------------------------------------------------------------------------

def test_explainability_ones_zero():
    assert explainability_loss(Cubemap.constant(4, 1, 1.0)) == 0.0


def test_explainability_inverse_e():
    loss = explainability_loss(Cubemap.constant(4, 1, math.exp(-1.0)))
    assert abs(loss - 1.0) < 1e-12


def test_explainability_matches_oracle(rng):
    m = rng.uniform(0.05, 1.0, size=(6, 4, 4, 1))
    want = -sum(math.log(v) for v in m.ravel()) / m.size
    assert abs(explainability_loss(Cubemap(m)) - want) < 1e-9


def test_explainability_domain_errors():
    bad = np.full((6, 4, 4, 1), 0.5)
    bad[0, 0, 0, 0] = 0.0
    with pytest.raises(ValueError):
        explainability_loss(Cubemap(bad))
    with pytest.raises(ValueError):
        explainability_loss(Cubemap.constant(4, 1, 1.1))


def test_explainability_monotone(rng):
    m = rng.uniform(0.2, 0.8, size=(6, 4, 4, 1))
    base = explainability_loss(Cubemap(m))
    m2 = m.copy()
    m2[3, 1, 2, 0] += 0.1
    assert explainability_loss(Cubemap(m2)) < base


# ---------------------------------------------------------------------------
# total
# ---------------------------------------------------------------------------

def test_total_loss_zero():
    assert total_loss(0, 0, 0, 0) == 0.0


def test_total_loss_reported_weights():
    assert abs(total_loss(1, 1, 1, 1) - 1.44) < 1e-12
    assert DEFAULT_WEIGHTS.lambda_pose == 0.1
    assert DEFAULT_WEIGHTS.lambda_sm == 0.04
    assert DEFAULT_WEIGHTS.lambda_exp == 0.3


def test_total_loss_matches_oracle(rng):
    for _ in range(20):
        parts = rng.uniform(0, 2, size=4)
        w = LossWeights(*rng.uniform(0, 1, size=3))
        want = (parts[0] + w.lambda_pose * parts[1] + w.lambda_sm * parts[2]
                + w.lambda_exp * parts[3])
        assert abs(total_loss(*parts, weights=w) - want) < 1e-12


def test_total_loss_rejects_nonfinite():
    with pytest.raises(ValueError):
        total_loss(np.nan, 0, 0, 0)


def test_weights_validation():
    with pytest.raises(ValueError):
        LossWeights(lambda_pose=-0.1)


def test_loss_report_structure():
    rep = loss_report(0.5, 0.1, 0.2, 0.3)
    assert rep["total"] == total_loss(0.5, 0.1, 0.2, 0.3)
    assert rep["weights"]["lambda_sm"] == 0.04
    assert set(rep) == {"rec", "pose", "sm", "exp", "total", "weights"}


# ---------------------------------------------------------------------------
# fused reconstruction losses
# ---------------------------------------------------------------------------

def test_fused_cubemap_loss_matches_composed(rng):
    ref, tgt, depth, rel, *_ = render_pair(21, 16)
    cloud = transform_pointcloud(depth_to_pointcloud(depth), rel)
    warped, valid = warp_cubemap(cloud, tgt)
    want = photometric_loss(ref, warped, valid)
    got = reconstruction_loss_cubemap(ref, tgt, depth, rel)
    assert abs(got - want) < 1e-12


def test_fused_cubemap_loss_with_invalid_depth(rng):
    ref, tgt, depth, rel, *_ = render_pair(22, 16)
    d = depth.faces.copy()
    d[rng.uniform(size=d.shape) < 0.3] = 0.0
    depth = Cubemap(d)
    cloud = transform_pointcloud(depth_to_pointcloud(depth), rel)
    warped, valid = warp_cubemap(cloud, tgt)
    want = photometric_loss(ref, warped, valid)
    got = reconstruction_loss_cubemap(ref, tgt, depth, rel)
    assert abs(got - want) < 1e-12


def test_fused_equirect_loss_matches_composed():
    rng = np.random.default_rng(5)
    scene = random_scene(rng)
    pose_ref = PoseSE3.identity()
    pose_tgt = PoseSE3.from_rotvec((0.01, 0.0, 0.0), (0.0, 0.02, 0.03))
    ref_rgb, ref_depth = render_equirect(scene, pose_ref, 32)
    tgt_rgb, _ = render_equirect(scene, pose_tgt, 32)
    rel = pose_tgt.inverse().compose(pose_ref)
    warped, valid = warp_equirect(ref_depth.data[:, :, 0], tgt_rgb.data, rel)
    want = float(np.abs(ref_rgb.data[valid] - warped[valid]).mean())
    got = reconstruction_loss_equirect(ref_rgb, tgt_rgb, ref_depth, rel)
    assert abs(got - want) < 1e-12


def test_fused_loss_validation(rng):
    ref = Cubemap(rng.uniform(size=(6, 8, 8, 3)))
    depth = Cubemap.constant(8, 1, 1.0)
    with pytest.raises(ValueError):
        reconstruction_loss_cubemap(ref, Cubemap.constant(4, 3, 0.0), depth,
                                    PoseSE3.identity())
    with pytest.raises(ValueError):
        reconstruction_loss_cubemap(ref, ref, Cubemap.constant(4, 1, 1.0),
                                    PoseSE3.identity())
