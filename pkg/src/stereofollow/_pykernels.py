"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
from __future__ import annotations

import numpy as np


def hue_bin_counts(hue, sat, min_saturation: float, nbins: int):
    hue = np.ascontiguousarray(hue, dtype=np.float64)
    sat = np.ascontiguousarray(sat, dtype=np.float64)
    if hue.shape != sat.shape:
        raise ValueError("hue and saturation arrays differ in length")
    keep = np.isfinite(hue) & ~(sat < min_saturation)
    width = 360.0 / nbins
    idx = np.floor(hue[keep] / width).astype(np.int64) % nbins
    counts = np.bincount(idx, minlength=nbins).astype(np.int64)
    return counts, int(keep.sum())


def segments_blocked(ax: float, ay: float, points, centers, radius: float):
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    if len(points) == 0 or len(centers) == 0:
        return np.zeros(len(points), dtype=bool)
    dx = (points[:, 0] - ax)[:, None]
    dy = (points[:, 1] - ay)[:, None]
    dd = dx * dx + dy * dy
    cx = centers[None, :, 0]
    cy = centers[None, :, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((cx - ax) * dx + (cy - ay) * dy) / dd
    t = np.where(dd > 0.0, np.clip(t, 0.0, 1.0), 0.0)
    ex = cx - (ax + t * dx)
    ey = cy - (ay + t * dy)
    return np.any(ex * ex + ey * ey < radius * radius, axis=1)
