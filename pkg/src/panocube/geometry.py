"""Coordinate conventions, cube face rotations and rigid motions.

Conventions used throughout the package:
  * camera frame: +x right, +y down, +z forward (image rows grow downward)
  * rotations act on column vectors from the left, p' = R @ p
  * Euler angles compose intrinsically as Rz(tz) @ Ry(ty) @ Rx(tx)
  * cube faces use 90-degree FoV pinhole cameras with focal length w/2
  * canonical face order (Back, Down, Front, Left, Right, Up) is used for
    every serialization and for tie-breaking
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

ORTHONORMAL_TOL = 1e-9


class Face(IntEnum):
    """The six cube faces in canonical order."""

    BACK = 0
    DOWN = 1
    FRONT = 2
    LEFT = 3
    RIGHT = 4
    UP = 5

    @property
    def suffix(self) -> str:
        return "BDFLRU"[self.value]


FACE_ORDER = tuple(Face)

# Euler angles (tx, ty, tz) of each face's rotation relative to the front face.
_FACE_EULER = {
    Face.BACK: (0.0, math.pi, 0.0),
    Face.DOWN: (-0.5 * math.pi, 0.0, 0.0),
    Face.FRONT: (0.0, 0.0, 0.0),
    Face.LEFT: (0.0, -0.5 * math.pi, 0.0),
    Face.RIGHT: (0.0, 0.5 * math.pi, 0.0),
    Face.UP: (0.5 * math.pi, 0.0, 0.0),
}


def euler_to_rotation(theta) -> np.ndarray:
    """Rotation matrix from Euler angles (tx, ty, tz), composed Rz @ Ry @ Rx."""
    theta = np.asarray(theta, dtype=float).reshape(3)
    if not np.all(np.isfinite(theta)):
        raise ValueError("euler angles must be finite")
    tx, ty, tz = theta
    cx, sx = math.cos(tx), math.sin(tx)
    cy, sy = math.cos(ty), math.sin(ty)
    cz, sz = math.cos(tz), math.sin(tz)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=float)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=float)
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=float)
    return rz @ ry @ rx


@lru_cache(maxsize=None)
def face_rotation(face: Face) -> np.ndarray:
    """Rotation taking front-face grid rays into the given face's orientation."""
    r = euler_to_rotation(_FACE_EULER[Face(face)])
    # entries are exactly 0/+-1 up to trig roundoff; snap for clean indexing math
    r = np.round(r)
    r.flags.writeable = False
    return r


def is_rotation(r: np.ndarray, tol: float = ORTHONORMAL_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    return (
        np.all(np.abs(r.T @ r - np.eye(3)) <= tol)
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def rotvec_to_rotation(v) -> np.ndarray:
    """Rodrigues' formula, exp: so(3) -> SO(3)."""
    v = np.asarray(v, dtype=float).reshape(3)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        k = _skew(v)
        return np.eye(3) + k + 0.5 * (k @ k)
    axis = v / angle
    k = _skew(axis)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotation_to_rotvec(r: np.ndarray) -> np.ndarray:
    """Log map SO(3) -> so(3), returned as axis * angle."""
    r = np.asarray(r, dtype=float)
    cos_angle = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    angle = math.acos(cos_angle)
    if angle < 1e-10:
        return np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0
    if angle > math.pi - 1e-6:
        # near pi the antisymmetric part degenerates; recover axis from R + I
        a = (r + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(a), 0.0, None))
        # fix signs from the off-diagonal terms using the largest component
        i = int(np.argmax(axis))
        if axis[i] > 0:
            for j in range(3):
                if j != i:
                    axis[j] = a[i, j] / axis[i]
        n = np.linalg.norm(axis)
        if n > 0:
            axis = axis / n
        return axis * angle
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return w * (angle / (2.0 * math.sin(angle)))


def rotation_angle(r: np.ndarray) -> float:
    """Rotation angle in radians."""
    cos_angle = np.clip((np.trace(np.asarray(r, dtype=float)) - 1.0) / 2.0, -1.0, 1.0)
    return math.acos(cos_angle)


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]], dtype=float
    )


@dataclass(frozen=True)
class PoseSE3:
    """Rigid motion acting on points as p' = R @ p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not is_rotation(r, tol=1e-6):
            raise ValueError("rotation is not orthonormal with det +1")
        if not np.all(np.isfinite(t)):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_rotvec(cls, rotvec, translation=(0.0, 0.0, 0.0)) -> "PoseSE3":
        return cls(rotvec_to_rotation(rotvec), np.asarray(translation, dtype=float))

    def compose(self, other: "PoseSE3") -> "PoseSE3":
        """self after other: (self ∘ other)(p) = self(other(p))."""
        return PoseSE3(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "PoseSE3":
        rt = self.rotation.T
        return PoseSE3(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (..., 3) array of points."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def rotvec(self) -> np.ndarray:
        return rotation_to_rotvec(self.rotation)

    def as_vector(self) -> np.ndarray:
        """6-vector encoding (axis-angle rotation, translation)."""
        return np.concatenate([self.rotvec(), self.translation])

    def to_dict(self) -> dict:
        return {
            "rotation_axis_angle": [float(x) for x in self.rotvec()],
            "translation": [float(x) for x in self.translation],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoseSE3":
        return cls.from_rotvec(d["rotation_axis_angle"], d["translation"])


@dataclass(frozen=True)
class FaceGrid:
    """Per-pixel unnormalized view rays for one cube face.

    rays[v, u] = face_rotation(face) @ (u + 0.5 - w/2, v + 0.5 - w/2, 0.5 w),
    i.e. a 90-degree FoV pinhole with focal length w/2, sampled at pixel centers.
    """

    face: Face
    width: int
    rays: np.ndarray = field(repr=False)


@lru_cache(maxsize=32)
def make_face_grid(face: Face, width: int) -> FaceGrid:
    if width < 2:
        raise ValueError(f"face width must be >= 2, got {width}")
    face = Face(face)
    offsets = np.arange(width, dtype=float) + 0.5 - width / 2.0
    x, y = np.meshgrid(offsets, offsets, indexing="xy")
    rays = np.stack([x, y, np.full_like(x, 0.5 * width)], axis=-1)
    rays = rays @ face_rotation(face).T
    rays.flags.writeable = False
    return FaceGrid(face=face, width=width, rays=rays)


def all_face_rays(width: int) -> np.ndarray:
    """Stacked (6, w, w, 3) rays in canonical face order."""
    return np.stack([make_face_grid(f, width).rays for f in FACE_ORDER])


def face_of_direction(dirs: np.ndarray) -> np.ndarray:
    """Select the cube face whose frustum contains each direction.

    Containment is z > 0 and |x| <= z, |y| <= z in the face's camera frame;
    boundary ties go to the first face in canonical order.
    Returns an int array of Face values with the same leading shape as dirs.
    """
    dirs = np.asarray(dirs, dtype=float)
    local = np.stack([dirs @ face_rotation(f) for f in FACE_ORDER], axis=0)
    x, y, z = local[..., 0], local[..., 1], local[..., 2]
    contained = (z > 0) & (np.abs(x) <= z) & (np.abs(y) <= z)
    choice = np.argmax(contained, axis=0)
    # roundoff can leave a direction on a cube edge outside every closed
    # frustum test; fall back to the face it points into most directly
    none = ~np.any(contained, axis=0)
    if np.any(none):
        score = z - np.maximum(np.abs(x), np.abs(y))
        choice = np.where(none, np.argmax(score, axis=0), choice)
    return choice
