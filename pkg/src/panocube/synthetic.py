"""Analytic ground-truth generator: ray-cast textured axis-aligned box rooms.

Replaces a rendered dataset for testing: every pixel's depth and color come
from closed-form ray/plane intersections, so depth, relative poses and
occlusion masks are exact oracles for the projection, warping and loss code.
Depth is ray length in meters, matching the warping module's convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PoseSE3
from .projection import Cubemap, EquirectImage, equirect_rays
from .warping import normalized_face_rays

WALL_IDS = ("x-", "x+", "y-", "y+", "z-", "z+")


@dataclass(frozen=True)
class Texture:
    """Procedural wall texture.

    kind 'checker': two colors by cell parity; smooth=True replaces the hard
    cells with a product-of-sines blend (bandlimited, better for bilinear
    warping tests). kind 'gradient': sinusoidal blend along the first
    in-plane axis.
    """

    kind: str = "checker"
    period_m: float = 0.5
    color_a: tuple = (0.9, 0.2, 0.1)
    color_b: tuple = (0.1, 0.3, 0.9)
    smooth: bool = False

    def __post_init__(self):
        if self.kind not in ("checker", "gradient"):
            raise ValueError(f"unknown texture kind {self.kind!r}")
        if self.period_m <= 0:
            raise ValueError("texture period must be positive")

    def eval(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        a = np.asarray(self.color_a, dtype=float)
        b = np.asarray(self.color_b, dtype=float)
        if self.kind == "gradient":
            blend = 0.5 + 0.5 * np.sin(2.0 * np.pi * u / self.period_m)
        elif self.smooth:
            blend = 0.5 + 0.5 * (np.sin(2.0 * np.pi * u / self.period_m)
                                 * np.sin(2.0 * np.pi * v / self.period_m))
        else:
            parity = (np.floor(u / self.period_m) + np.floor(v / self.period_m)) % 2
            blend = parity
        return a[None, :] + blend[:, None] * (b - a)[None, :]

    def to_dict(self) -> dict:
        return {
            "type": self.kind,
            "period_m": self.period_m,
            "color_a": list(self.color_a),
            "color_b": list(self.color_b),
            "smooth": self.smooth,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Texture":
        return cls(kind=d["type"], period_m=d["period_m"],
                   color_a=tuple(d["color_a"]), color_b=tuple(d["color_b"]),
                   smooth=bool(d.get("smooth", False)))


@dataclass(frozen=True)
class Obstacle:
    center: np.ndarray
    half_extents: np.ndarray
    texture: Texture

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "half_extents",
                           np.asarray(self.half_extents, dtype=float).reshape(3))
        if np.any(self.half_extents <= 0):
            raise ValueError("obstacle half extents must be positive")


@dataclass(frozen=True)
class SyntheticScene:
    """Axis-aligned box room centered at the origin, optional interior boxes."""

    half_extents: np.ndarray
    wall_textures: dict = field(default_factory=dict)
    obstacles: tuple = ()

    def __post_init__(self):
        he = np.asarray(self.half_extents, dtype=float).reshape(3)
        if np.any(he <= 0):
            raise ValueError("room half extents must be positive")
        object.__setattr__(self, "half_extents", he)
        textures = dict(self.wall_textures)
        for wall in WALL_IDS:
            textures.setdefault(wall, Texture())
        object.__setattr__(self, "wall_textures", textures)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.half_extents) * 2.0)

    def in_free_space(self, pos, margin: float = 1e-6) -> bool:
        pos = np.asarray(pos, dtype=float).reshape(3)
        if np.any(np.abs(pos) >= self.half_extents - margin):
            return False
        for ob in self.obstacles:
            if np.all(np.abs(pos - ob.center) <= ob.half_extents + margin):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "room": {"half_extents": [float(x) for x in self.half_extents]},
            "obstacles": [
                {
                    "center": [float(x) for x in ob.center],
                    "half_extents": [float(x) for x in ob.half_extents],
                    "texture": ob.texture.to_dict(),
                }
                for ob in self.obstacles
            ],
            "textures": {w: t.to_dict() for w, t in self.wall_textures.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticScene":
        textures = {w: Texture.from_dict(t) for w, t in d.get("textures", {}).items()}
        obstacles = tuple(
            Obstacle(ob["center"], ob["half_extents"], Texture.from_dict(ob["texture"]))
            for ob in d.get("obstacles", [])
        )
        return cls(half_extents=d["room"]["half_extents"],
                   wall_textures=textures, obstacles=obstacles)


@dataclass(frozen=True)
class Trajectory:
    """World-from-camera poses at a fixed frame interval."""

    poses: tuple
    fps: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def to_dict(self) -> dict:
        return {"fps": self.fps, "poses": [p.to_dict() for p in self.poses]}

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(poses=tuple(PoseSE3.from_dict(p) for p in d["poses"]),
                   fps=d.get("fps", 10.0))


def load_scene(path) -> SyntheticScene:
    with open(path) as fh:
        return SyntheticScene.from_dict(json.load(fh))


def save_scene(path, scene: SyntheticScene) -> None:
    with open(path, "w") as fh:
        json.dump(scene.to_dict(), fh, indent=2)


def load_trajectory(path) -> Trajectory:
    with open(path) as fh:
        return Trajectory.from_dict(json.load(fh))


def save_trajectory(path, traj: Trajectory) -> None:
    with open(path, "w") as fh:
        json.dump(traj.to_dict(), fh, indent=2)


# ---------------------------------------------------------------------------
# ray casting
# ---------------------------------------------------------------------------

_EPS = 1e-12


def cast_rays(scene: SyntheticScene, origin: np.ndarray, dirs: np.ndarray
              ) -> tuple[np.ndarray, np.ndarray]:
    """Nearest surface hit for unit rays from an interior origin.

    Returns (t, color): ray lengths (N,) and RGB colors (N, 3).
    """
    origin = np.asarray(origin, dtype=float).reshape(3)
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
    n = dirs.shape[0]
    best_t = np.full(n, np.inf)
    surface = np.full(n, -1, dtype=np.int64)  # wall index 0..5, 6+k obstacle k
    hit_axis = np.zeros(n, dtype=np.int64)

    # room walls: minimum positive plane intersection always lies on the box
    for w, wall in enumerate(WALL_IDS):
        axis, sign = w // 2, (-1.0 if w % 2 == 0 else 1.0)
        d = dirs[:, axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (sign * scene.half_extents[axis] - origin[axis]) / d
        ok = (np.abs(d) > _EPS) & (t > _EPS) & (t < best_t)
        best_t[ok] = t[ok]
        surface[ok] = w
        hit_axis[ok] = axis

    # obstacles: slab-method entry point
    for k, ob in enumerate(scene.obstacles):
        lo = ob.center - ob.half_extents
        hi = ob.center + ob.half_extents
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lo = (lo[None, :] - origin[None, :]) / dirs
            t_hi = (hi[None, :] - origin[None, :]) / dirs
        t_near = np.fmin(t_lo, t_hi)
        t_far = np.fmax(t_lo, t_hi)
        # parallel rays: slab constraint is pass/fail, not a t bound
        parallel = np.abs(dirs) <= _EPS
        inside_slab = (origin[None, :] >= lo[None, :]) & (origin[None, :] <= hi[None, :])
        t_near[parallel] = -np.inf
        t_far[parallel] = np.inf
        t_far[parallel & ~inside_slab] = -np.inf
        t_enter = t_near.max(axis=1)
        t_exit = t_far.min(axis=1)
        enter_axis = t_near.argmax(axis=1)
        ok = (t_enter > _EPS) & (t_enter <= t_exit) & (t_enter < best_t)
        best_t[ok] = t_enter[ok]
        surface[ok] = 6 + k
        hit_axis[ok] = enter_axis[ok]

    if np.any(surface < 0):
        raise ValueError("ray escaped the room; origin must be inside")

    points = origin[None, :] + best_t[:, None] * dirs
    colors = np.zeros((n, 3), dtype=np.float64)
    for sid in np.unique(surface):
        sel = surface == sid
        if sid >= 6:
            # obstacle faces can differ in normal axis; texture per axis group
            tex = scene.obstacles[sid - 6].texture
            for ax in np.unique(hit_axis[sel]):
                sub = sel & (hit_axis == ax)
                axes = [a for a in range(3) if a != ax]
                colors[sub] = tex.eval(points[sub, axes[0]], points[sub, axes[1]])
        else:
            tex = scene.wall_textures[WALL_IDS[sid]]
            axes = [a for a in range(3) if a != sid // 2]
            colors[sel] = tex.eval(points[sel, axes[0]], points[sel, axes[1]])
    return best_t, colors


def _check_pose(scene: SyntheticScene, pose: PoseSE3) -> None:
    if not scene.in_free_space(pose.translation):
        raise ValueError("camera pose is outside free space")


def render_equirect(scene: SyntheticScene, pose: PoseSE3, height: int
                    ) -> tuple[EquirectImage, EquirectImage]:
    """Render RGB and depth panoramas from a world-from-camera pose."""
    _check_pose(scene, pose)
    rays = equirect_rays(height).reshape(-1, 3)
    dirs = rays @ pose.rotation.T
    t, colors = cast_rays(scene, pose.translation, dirs)
    rgb = EquirectImage(colors.reshape(height, 2 * height, 3))
    depth = EquirectImage(t.reshape(height, 2 * height, 1))
    return rgb, depth


def render_cubemap(scene: SyntheticScene, pose: PoseSE3, face_width: int
                   ) -> tuple[Cubemap, Cubemap]:
    """Render RGB and depth cubemaps directly (no equirect resampling)."""
    _check_pose(scene, pose)
    rays = normalized_face_rays(face_width).reshape(-1, 3)
    dirs = rays @ pose.rotation.T
    t, colors = cast_rays(scene, pose.translation, dirs)
    rgb = Cubemap(colors.reshape(6, face_width, face_width, 3))
    depth = Cubemap(t.reshape(6, face_width, face_width, 1))
    return rgb, depth


def render_sequence(scene: SyntheticScene, trajectory: Trajectory, height: int
                    ) -> tuple[list, list]:
    """Render every trajectory pose; also emit the consecutive relative poses
    inverse(pose_t) ∘ pose_{t+1}."""
    frames = []
    for pose in trajectory.poses:
        rgb, depth = render_equirect(scene, pose, height)
        frames.append({"rgb": rgb, "depth": depth, "pose": pose})
    relative = [
        trajectory.poses[i].inverse().compose(trajectory.poses[i + 1])
        for i in range(len(trajectory.poses) - 1)
    ]
    return frames, relative


def _occlusion_core(scene: SyntheticScene, pose_ref: PoseSE3, pose_tgt: PoseSE3,
                    rays: np.ndarray, depth: np.ndarray,
                    tol: float = 1e-3) -> np.ndarray:
    valid = depth > 0
    mask = np.ones(depth.shape, dtype=np.float64)
    pts_world = pose_ref.apply(rays[valid] * depth[valid][:, None])
    rel = pts_world - pose_tgt.translation[None, :]
    dist = np.linalg.norm(rel, axis=1)
    scene_t, _ = cast_rays(scene, pose_tgt.translation, rel / dist[:, None])
    vals = np.ones(dist.shape[0])
    vals[scene_t < dist - tol] = 0.0
    mask[valid] = vals
    return mask


def occlusion_mask(scene: SyntheticScene, pose_ref: PoseSE3, pose_tgt: PoseSE3,
                   depth_ref: Cubemap) -> np.ndarray:
    """(6, w, w) mask: 0 where the reference surface point is occluded in the
    target view (target scene depth along its direction shorter by > 1 mm)."""
    w = depth_ref.face_width
    rays = normalized_face_rays(w)
    return _occlusion_core(scene, pose_ref, pose_tgt, rays.reshape(-1, 3),
                           depth_ref.faces[:, :, :, 0].ravel()).reshape(6, w, w)


def occlusion_mask_equirect(scene: SyntheticScene, pose_ref: PoseSE3,
                            pose_tgt: PoseSE3, depth_ref: EquirectImage) -> np.ndarray:
    """(H, 2H) equirect-domain occlusion mask."""
    h = depth_ref.height
    rays = equirect_rays(h)
    return _occlusion_core(scene, pose_ref, pose_tgt, rays.reshape(-1, 3),
                           depth_ref.data[:, :, 0].ravel()).reshape(h, 2 * h)


# ---------------------------------------------------------------------------
# reproducible random corpora
# ---------------------------------------------------------------------------

_PALETTE = [
    (0.85, 0.15, 0.10), (0.10, 0.35, 0.85), (0.10, 0.75, 0.25),
    (0.95, 0.80, 0.10), (0.70, 0.15, 0.80), (0.95, 0.55, 0.10),
    (0.15, 0.80, 0.80), (0.90, 0.90, 0.90),
]


def random_scene(rng: np.random.Generator, n_obstacles: int = 0,
                 smooth_textures: bool = True) -> SyntheticScene:
    """Random desk-scale room with distinct smooth checker walls."""
    he = rng.uniform(1.5, 2.5, size=3)
    walls = {}
    palette = list(_PALETTE)
    rng.shuffle(palette)
    for i, wall in enumerate(WALL_IDS):
        walls[wall] = Texture(
            kind="checker",
            period_m=float(rng.uniform(0.4, 0.8)),
            color_a=palette[i % len(palette)],
            color_b=palette[(i + 3) % len(palette)],
            smooth=smooth_textures,
        )
    obstacles = []
    for k in range(n_obstacles):
        size = rng.uniform(0.15, 0.4, size=3)
        center = rng.uniform(-0.5, 0.5, size=3) * he
        obstacles.append(Obstacle(center, size, Texture(
            kind="checker", period_m=float(rng.uniform(0.2, 0.4)),
            color_a=palette[(k + 1) % len(palette)],
            color_b=palette[(k + 5) % len(palette)],
            smooth=smooth_textures,
        )))
    return SyntheticScene(half_extents=he, wall_textures=walls,
                          obstacles=tuple(obstacles))


def random_interior_position(scene: SyntheticScene, rng: np.random.Generator,
                             margin: float = 0.4) -> np.ndarray:
    for _ in range(1000):
        pos = rng.uniform(-1.0, 1.0, size=3) * (scene.half_extents - margin)
        if scene.in_free_space(pos, margin=margin / 2):
            return pos
    raise RuntimeError("could not place a camera in free space")


def random_trajectory(scene: SyntheticScene, rng: np.random.Generator,
                      n_frames: int = 2, max_rotation: float = math.radians(5.0),
                      max_translation: float = 0.1, fps: float = 10.0) -> Trajectory:
    """Small consecutive motions starting from a random interior pose."""
    pos = random_interior_position(scene, rng)
    pose = PoseSE3.from_rotvec(rng.uniform(-math.pi, math.pi, size=3), pos)
    poses = [pose]
    while len(poses) < n_frames:
        for _ in range(1000):
            rot = rng.uniform(-1.0, 1.0, size=3)
            norm = np.linalg.norm(rot)
            rot = rot / max(norm, 1e-12) * rng.uniform(0, max_rotation)
            trans = rng.uniform(-1.0, 1.0, size=3)
            trans = trans / max(np.linalg.norm(trans), 1e-12) * rng.uniform(0, max_translation)
            step = PoseSE3.from_rotvec(rot, trans)
            cand = poses[-1].compose(step)
            if scene.in_free_space(cand.translation, margin=0.2):
                poses.append(cand)
                break
        else:
            raise RuntimeError("could not extend trajectory in free space")
    return Trajectory(poses=tuple(poses), fps=fps)
