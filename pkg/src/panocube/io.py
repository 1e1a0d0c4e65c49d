"""File formats: PNG (8/16-bit) for RGB, PFM (little-endian) for depth,
six-file cubemaps with canonical _B.._U suffixes, pose JSON."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import FACE_ORDER, PoseSE3
from .projection import Cubemap, EquirectImage


class PfmError(Exception):
    """Malformed PFM file."""


def write_png(path, data: np.ndarray, bit_depth: int = 8) -> None:
    """Write a (H, W, 3) or (H, W)/(H, W, 1) raster in [0, 1] as PNG."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    data = np.clip(data, 0.0, 1.0)
    if bit_depth == 8:
        arr = np.round(data * 255.0).astype(np.uint8)
        Image.fromarray(arr).save(path)
    elif bit_depth == 16:
        if data.ndim != 2:
            raise ValueError("16-bit PNG supported for single-channel rasters only")
        arr = np.round(data * 65535.0).astype(np.uint16)
        Image.fromarray(arr).save(path)
    else:
        raise ValueError("bit_depth must be 8 or 16")


def read_png(path) -> np.ndarray:
    """Read a PNG into float64 samples in [0, 1], shape (H, W, C)."""
    img = Image.open(path)
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        out = arr.astype(np.float64) / 255.0
    elif arr.dtype in (np.uint16, np.int32):
        out = arr.astype(np.float64) / 65535.0
    else:
        raise ValueError(f"unsupported PNG sample type {arr.dtype}")
    if out.ndim == 2:
        out = out[:, :, None]
    return out[:, :, :3] if out.shape[2] > 3 else out


def write_pfm(path, data: np.ndarray) -> None:
    """Write a single-channel float raster as little-endian PFM."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    if data.ndim != 2:
        raise ValueError("PFM writer handles single-channel rasters")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{w} {h}\n".encode())
        fh.write(b"-1.0\n")  # negative scale marks little-endian
        fh.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into (H, W) float64."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        header, rest = raw.split(b"\n", 1)
    except ValueError:
        raise PfmError(f"{path}: missing PFM header line")
    if header == b"PF":
        raise PfmError(f"{path}: color PFM not supported, expected grayscale 'Pf'")
    if header != b"Pf":
        raise PfmError(f"{path}: bad PFM magic {header[:8]!r}")
    m = re.match(rb"\s*(\d+)\s+(\d+)\s*\n([^\n]+)\n", rest)
    if not m:
        raise PfmError(f"{path}: malformed PFM dimensions/scale header")
    w, h = int(m.group(1)), int(m.group(2))
    try:
        scale = float(m.group(3))
    except ValueError:
        raise PfmError(f"{path}: malformed PFM scale {m.group(3)!r}")
    if scale == 0:
        raise PfmError(f"{path}: PFM scale must be nonzero")
    payload = rest[m.end():]
    expected = w * h * 4
    if len(payload) < expected:
        raise PfmError(f"{path}: truncated PFM payload")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(payload[:expected], dtype=dtype).astype(np.float64)
    data = np.flipud(data.reshape(h, w)).copy()
    if abs(scale) != 1.0:
        data *= abs(scale)
    return data


def cubemap_paths(prefix, ext: str) -> list[Path]:
    prefix = Path(prefix)
    return [prefix.parent / f"{prefix.name}_{f.suffix}{ext}" for f in FACE_ORDER]


def write_cubemap(prefix, cube: Cubemap, depth: bool = False) -> list[Path]:
    """Write six face files in canonical order; PFM for depth, PNG otherwise."""
    ext = ".pfm" if depth else ".png"
    paths = cubemap_paths(prefix, ext)
    for f, p in zip(FACE_ORDER, paths):
        if depth:
            write_pfm(p, cube.faces[f.value, :, :, 0])
        else:
            write_png(p, cube.faces[f.value])
    return paths


def read_cubemap(prefix, depth: bool = False) -> Cubemap:
    ext = ".pfm" if depth else ".png"
    faces = []
    for p in cubemap_paths(prefix, ext):
        if not Path(p).exists():
            raise FileNotFoundError(f"missing cubemap face file {p}")
        faces.append(read_pfm(p)[:, :, None] if depth else read_png(p))
    return Cubemap(np.stack(faces))


def write_pose_json(path, pose: PoseSE3, extra: dict | None = None) -> None:
    record = pose.to_dict()
    if extra:
        record.update(extra)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)


def read_pose_json(path) -> PoseSE3:
    with open(path) as fh:
        return PoseSE3.from_dict(json.load(fh))


def write_poses_json(path, poses: list, relative: list | None = None) -> None:
    record = {"poses": [p.to_dict() for p in poses]}
    if relative is not None:
        record["relative_poses"] = [p.to_dict() for p in relative]
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)


def read_poses_json(path) -> dict:
    with open(path) as fh:
        record = json.load(fh)
    out = {"poses": [PoseSE3.from_dict(p) for p in record["poses"]]}
    if "relative_poses" in record:
        out["relative_poses"] = [PoseSE3.from_dict(p) for p in record["relative_poses"]]
    return out


def load_equirect(path) -> EquirectImage:
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        return EquirectImage(read_pfm(path)[:, :, None])
    return EquirectImage(read_png(path))
