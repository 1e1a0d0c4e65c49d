"""Depth error statistics and relative pose error."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import PoseSE3, rotation_angle
from .projection import Cubemap, EquirectImage


@dataclass(frozen=True)
class DepthMetrics:
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    delta1: float
    delta2: float
    delta3: float
    median_scaled: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RpeMetrics:
    rpe_r: float  # degrees
    rpe_t: float  # scene units (meters here); the unit is a convention choice

    def to_dict(self) -> dict:
        return {"rpe_r_deg": self.rpe_r, "rpe_t": self.rpe_t}


def _depth_array(d) -> np.ndarray:
    if isinstance(d, Cubemap):
        if d.channels != 1:
            raise ValueError("depth cubemap must have one channel")
        return d.faces[:, :, :, 0]
    if isinstance(d, EquirectImage):
        if d.channels != 1:
            raise ValueError("depth equirect must have one channel")
        return d.data[:, :, 0]
    return np.asarray(d, dtype=float)


def depth_metrics(pred, gt, valid=None, median_scale: bool = False) -> DepthMetrics:
    """Standard monocular depth metrics over valid pixels.

    pred and gt must share a representation (both cubemap or both equirect);
    pixel solid angles differ between the two, so they are never mixed.
    """
    if isinstance(pred, Cubemap) != isinstance(gt, Cubemap):
        raise ValueError("pred and gt must use the same representation")
    p = _depth_array(pred)
    g = _depth_array(gt)
    if p.shape != g.shape:
        raise ValueError("pred and gt shapes differ")
    if valid is None:
        valid = np.ones(p.shape, dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    if not np.any(valid):
        raise ValueError("no valid pixels")
    p = p[valid]
    g = g[valid]
    if np.any(g <= 0) or np.any(p <= 0):
        raise ValueError("depth must be positive on valid pixels")
    if median_scale:
        p = p * (np.median(g) / np.median(p))

    err = p - g
    thresh = np.maximum(p / g, g / p)
    return DepthMetrics(
        abs_rel=float(np.mean(np.abs(err) / g)),
        sq_rel=float(np.mean(err ** 2 / g)),
        rmse=float(math.sqrt(np.mean(err ** 2))),
        rmse_log=float(math.sqrt(np.mean((np.log(p) - np.log(g)) ** 2))),
        delta1=float(np.mean(thresh < 1.25)),
        delta2=float(np.mean(thresh < 1.25 ** 2)),
        delta3=float(np.mean(thresh < 1.25 ** 3)),
        median_scaled=median_scale,
    )


def rpe(pred: list, gt: list) -> RpeMetrics:
    """Mean rotation angle (degrees) and translation magnitude of the error
    poses inverse(gt) ∘ pred over a sequence of relative poses."""
    if len(pred) != len(gt):
        raise ValueError("pred and gt sequences differ in length")
    if len(pred) == 0:
        raise ValueError("need at least one pose pair")
    r_errs = []
    t_errs = []
    for p, g in zip(pred, gt):
        if not isinstance(p, PoseSE3) or not isinstance(g, PoseSE3):
            raise ValueError("sequences must contain PoseSE3")
        e = g.inverse().compose(p)
        r_errs.append(math.degrees(rotation_angle(e.rotation)))
        t_errs.append(float(np.linalg.norm(e.translation)))
    return RpeMetrics(rpe_r=float(np.mean(r_errs)), rpe_t=float(np.mean(t_errs)))
