"""Cube padding: border each face with texels copied from the adjacent faces,
oriented so the six faces become spatially continuous across cube edges.

The gather table is derived from face geometry, not hand-maintained: a pad
texel's position is found by folding the face plane 90 degrees around the
shared cube edge onto the neighboring face, which lands exactly on one of the
neighbor's texel centers (face rotations are signed axis permutations).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import FACE_ORDER, Face, face_rotation
from .projection import Cubemap

_SIDES = ("left", "right", "top", "bottom")


@dataclass(frozen=True)
class PaddedFaceGrid:
    """One face with a pad-wide border of adjacent-face texels.

    data: (w + 2p, w + 2p, C); provenance: int8 face index per texel
    (the face's own index over the interior).
    """

    face: Face
    pad: int
    data: np.ndarray = field(repr=False)
    provenance: np.ndarray = field(repr=False)

    @property
    def interior(self) -> np.ndarray:
        p = self.pad
        return self.data[p:-p, p:-p]


def _fold_positions(face: Face, width: int, pad: int, side: str):
    """3D cube-surface positions (in texel units, camera frame) for one pad
    strip, obtained by folding the strip around the shared edge."""
    w, p = width, pad
    half = w / 2.0
    idx = np.arange(w, dtype=float) + 0.5 - half   # along-edge texel centers
    layer = np.arange(1, p + 1, dtype=float) - 0.5  # distance past the edge
    if side in ("left", "right"):
        b, t = np.meshgrid(idx, layer, indexing="ij")   # (w, p)
        x = np.full_like(b, -half if side == "left" else half)
        pos = np.stack([x, b, half - t], axis=-1)
    else:
        a, t = np.meshgrid(idx, layer, indexing="ij")   # (w, p)
        y = np.full_like(a, -half if side == "top" else half)
        pos = np.stack([a, y, half - t], axis=-1)
    return pos @ face_rotation(face).T


def _locate_texels(pos: np.ndarray, width: int, exclude: Face):
    """Map cube-surface positions to (face, row, col) integer texel indices."""
    half = width / 2.0
    flat = pos.reshape(-1, 3)
    face_idx = np.full(flat.shape[0], -1, dtype=np.int64)
    rows = np.zeros(flat.shape[0], dtype=np.int64)
    cols = np.zeros(flat.shape[0], dtype=np.int64)
    for f in FACE_ORDER:
        if f == exclude:
            continue
        local = flat @ face_rotation(f)
        on_plane = (
            (np.abs(local[:, 2] - half) < 1e-6)
            & (np.abs(local[:, 0]) <= half)
            & (np.abs(local[:, 1]) <= half)
            & (face_idx < 0)
        )
        if not np.any(on_plane):
            continue
        c = local[on_plane, 0] + half - 0.5
        r = local[on_plane, 1] + half - 0.5
        if np.max(np.abs(c - np.round(c))) > 1e-6 or np.max(np.abs(r - np.round(r))) > 1e-6:
            raise AssertionError("fold did not land on texel centers")
        face_idx[on_plane] = f.value
        cols[on_plane] = np.round(c).astype(np.int64)
        rows[on_plane] = np.round(r).astype(np.int64)
    if np.any(face_idx < 0):
        raise AssertionError("pad texel not located on any adjacent face")
    return (face_idx.reshape(pos.shape[:-1]), rows.reshape(pos.shape[:-1]),
            cols.reshape(pos.shape[:-1]))


@lru_cache(maxsize=16)
def _pad_tables(width: int, pad: int):
    """Per face and side: (src_face, src_row, src_col) gather arrays."""
    tables = {}
    for f in FACE_ORDER:
        for side in _SIDES:
            pos = _fold_positions(f, width, pad, side)
            tables[(f, side)] = _locate_texels(pos, width, exclude=f)
    return tables


def padding_adjacency(width: int = 8) -> dict:
    """Summarize which neighbor feeds each (face, side) strip; used to check
    the derived tables against a frozen expectation."""
    tables = _pad_tables(width, 1)
    summary = {}
    for (f, side), (face_idx, rows, cols) in tables.items():
        neighbors = np.unique(face_idx)
        assert neighbors.size == 1
        summary[(f.name, side)] = Face(int(neighbors[0])).name
    return summary


def cube_pad(src: Cubemap, pad: int) -> list[PaddedFaceGrid]:
    """Pad all six faces; returns PaddedFaceGrids in canonical face order."""
    w = src.face_width
    if not 1 <= pad <= w // 2:
        raise ValueError(f"pad must be in [1, {w // 2}], got {pad}")
    tables = _pad_tables(w, pad)
    out = []
    p = pad
    for f in FACE_ORDER:
        data = np.zeros((w + 2 * p, w + 2 * p, src.channels), dtype=np.float64)
        prov = np.full((w + 2 * p, w + 2 * p), f.value, dtype=np.int8)
        data[p:-p, p:-p] = src.faces[f.value]

        for side in _SIDES:
            sf, sr, sc = tables[(f, side)]
            strip = src.faces[sf, sr, sc]           # (w, p, C)
            if side == "left":
                data[p:-p, :p] = strip[:, ::-1]
                prov[p:-p, :p] = sf[:, ::-1]
            elif side == "right":
                data[p:-p, -p:] = strip
                prov[p:-p, -p:] = sf
            elif side == "top":
                data[:p, p:-p] = np.transpose(strip[:, ::-1], (1, 0, 2))
                prov[:p, p:-p] = sf[:, ::-1].T
            else:
                data[-p:, p:-p] = np.transpose(strip, (1, 0, 2))
                prov[-p:, p:-p] = sf.T

        # corner blocks: average of the two adjacent edge extrapolations
        # (vertical strip continued past the edge, horizontal strip likewise)
        data[:p, :p] = 0.5 * (data[p, :p][None, :] + data[:p, p][:, None])
        data[:p, -p:] = 0.5 * (data[p, -p:][None, :] + data[:p, -p - 1][:, None])
        data[-p:, :p] = 0.5 * (data[-p - 1, :p][None, :] + data[-p:, p][:, None])
        data[-p:, -p:] = 0.5 * (data[-p - 1, -p:][None, :] + data[-p:, -p - 1][:, None])
        prov[:p, :p] = prov[p, :p][None, :]
        prov[:p, -p:] = prov[p, -p:][None, :]
        prov[-p:, :p] = prov[-p - 1, :p][None, :]
        prov[-p:, -p:] = prov[-p - 1, -p:][None, :]

        out.append(PaddedFaceGrid(face=f, pad=p, data=data, provenance=prov))
    return out


def pad_channels(faces: np.ndarray, pad: int) -> np.ndarray:
    """cube_pad on a raw (6, w, w, C) array, returned as (6, w+2p, w+2p, C)."""
    grids = cube_pad(Cubemap(faces), pad)
    return np.stack([g.data for g in grids])
