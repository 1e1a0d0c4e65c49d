"""Shared fixtures and synthetic-pair helpers for the test suite."""

import math

import numpy as np
import pytest

from panocube.geometry import PoseSE3
from panocube.synthetic import (random_interior_position, random_scene,
                                render_cubemap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pose(rng, max_angle=math.pi, max_trans=1.0):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0, max_angle)
    trans = rng.uniform(-max_trans, max_trans, size=3)
    return PoseSE3.from_rotvec(axis * angle, trans)


def render_pair(seed, face_width, max_rot_deg=2.0, max_trans=0.05):
    """Two cubemap frames of one random room with a small relative motion.

    Returns (ref_rgb, tgt_rgb, ref_depth, rel, scene, pose_ref, pose_tgt)
    where rel is the motion taking reference-frame points into the target
    camera frame (the convention the warp expects).
    """
    rng = np.random.default_rng(seed)
    scene = random_scene(rng)
    pos = random_interior_position(scene, rng)
    rot_ref = rng.uniform(-math.pi, math.pi, size=3)
    pose_ref = PoseSE3.from_rotvec(rot_ref, pos)

    step_rot = rng.normal(size=3)
    step_rot *= math.radians(max_rot_deg) * rng.uniform(0, 1) / np.linalg.norm(step_rot)
    step_trans = rng.normal(size=3)
    step_trans *= max_trans * rng.uniform(0, 1) / np.linalg.norm(step_trans)
    pose_tgt = pose_ref.compose(PoseSE3.from_rotvec(step_rot, step_trans))

    ref_rgb, ref_depth = render_cubemap(scene, pose_ref, face_width)
    tgt_rgb, _ = render_cubemap(scene, pose_tgt, face_width)
    rel = pose_tgt.inverse().compose(pose_ref)
    return ref_rgb, tgt_rgb, ref_depth, rel, scene, pose_ref, pose_tgt
