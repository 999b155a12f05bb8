"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used. Set ``STEREOFOLLOW_PURE_PYTHON=1``
to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("STEREOFOLLOW_PURE_PYTHON", "") not in ("", "0"):
    backend = _pykernels
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        backend = _pykernels
    else:
        backend = compiled_backend

BACKEND_NAME = "cython" if backend is compiled_backend and compiled_backend is not None else "python"


def _f64(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    return a.reshape(-1, 2) if ndim == 2 else a.reshape(-1)


def hue_bin_counts(hue, sat, min_saturation: float, nbins: int = 36):
    """Per-bin counts of finite hues whose saturation is >= ``min_saturation``."""
    return backend.hue_bin_counts(_f64(hue, 1), _f64(sat, 1), float(min_saturation), int(nbins))


def segments_blocked(ax: float, ay: float, points, centers, radius: float):
    """For each segment (ax, ay)->point, whether it passes strictly within ``radius`` of any center."""
    return backend.segments_blocked(float(ax), float(ay), _f64(points, 2), _f64(centers, 2), float(radius))
