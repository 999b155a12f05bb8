"""Hue-only appearance model: HSV conversion, hue histograms and the similarity gate.

Only hue is kept because it does not move when a scene gets brighter or darker.
Pixels with low saturation are dropped first, since their hue is numerically
unstable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .errors import NoAppearanceDataError, ParameterError

N_BINS = 36
BIN_WIDTH_DEG = 360.0 / N_BINS
DEFAULT_MIN_SATURATION = 0.1
DEFAULT_THRESHOLD = 0.6
TEMPLATE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RgbPixel:
    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ParameterError(f"channel {name}={val} outside [0, 1]")


@dataclass(frozen=True)
class HsvPixel:
    """``h`` is None when the pixel is achromatic and hue is undefined."""

    h: float | None
    s: float
    v: float

    @property
    def hue_defined(self) -> bool:
        return self.h is not None


def rgb_to_hsv(p: RgbPixel) -> HsvPixel:
    r, g, b = p.r, p.g, p.b
    mx = max(r, g, b)
    mn = min(r, g, b)
    delta = mx - mn
    s = delta / mx if mx > 0 else 0.0
    if delta == 0:
        return HsvPixel(None, 0.0, mx)
    if mx == r:
        h = 60.0 * (((g - b) / delta) % 6.0)
    elif mx == g:
        h = 60.0 * ((b - r) / delta + 2.0)
    else:
        h = 60.0 * ((r - g) / delta + 4.0)
    h %= 360.0
    return HsvPixel(h, s, mx)


def rgb_to_hsv_array(rgb) -> np.ndarray:
    """Vectorized :func:`rgb_to_hsv` over an (N, 3) array; undefined hue becomes NaN."""
    rgb = np.asarray(rgb, dtype=np.float64).reshape(-1, 3)
    if rgb.size and (rgb.min() < 0.0 or rgb.max() > 1.0):
        raise ParameterError("RGB channels must lie in [0, 1]")
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    mx = rgb.max(axis=1) if len(rgb) else np.zeros(0)
    mn = rgb.min(axis=1) if len(rgb) else np.zeros(0)
    delta = mx - mn
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(mx > 0, delta / mx, 0.0)
        h = np.full(len(rgb), np.nan)
        rc = delta > 0
        red = rc & (mx == r)
        green = rc & ~red & (mx == g)
        blue = rc & ~red & ~green
        h[red] = 60.0 * (((g - b)[red] / delta[red]) % 6.0)
        h[green] = 60.0 * ((b - r)[green] / delta[green] + 2.0)
        h[blue] = 60.0 * ((r - g)[blue] / delta[blue] + 4.0)
    h = np.where(np.isnan(h), np.nan, h % 360.0)
    s = np.where(rc, s, 0.0)
    return np.column_stack([h, s, mx])


def as_hsv_array(pixels) -> np.ndarray:
    """Normalize a sequence of :class:`HsvPixel` or an (N, 3) array to an (N, 3) float array."""
    if isinstance(pixels, np.ndarray):
        return np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    pixels = list(pixels)
    if not pixels:
        return np.zeros((0, 3))
    if isinstance(pixels[0], HsvPixel):
        return np.array(
            [(math.nan if p.h is None else p.h, p.s, p.v) for p in pixels], dtype=np.float64
        )
    arr = np.array(
        [[math.nan if c is None else c for c in row] for row in pixels], dtype=np.float64
    )
    return arr.reshape(-1, 3)


class HueHistogram:
    """Normalized 36-bin hue distribution. ``sample_count == 0`` marks an empty histogram."""

    __slots__ = ("bins", "sample_count")

    def __init__(self, bins: Iterable[float], sample_count: int):
        arr = np.array(bins, dtype=np.float64)
        if arr.shape != (N_BINS,):
            raise ParameterError(f"expected {N_BINS} bins, got shape {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ParameterError("histogram bins must be finite and non-negative")
        if sample_count < 0:
            raise ParameterError("sample_count must be >= 0")
        arr.setflags(write=False)
        self.bins = arr
        self.sample_count = int(sample_count)

    @classmethod
    def empty(cls) -> HueHistogram:
        return cls(np.zeros(N_BINS), 0)

    @property
    def is_empty(self) -> bool:
        return self.sample_count == 0

    def argmax_bin(self) -> int:
        return int(np.argmax(self.bins))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HueHistogram):
            return NotImplemented
        return self.sample_count == other.sample_count and bool(np.array_equal(self.bins, other.bins))

    def __repr__(self) -> str:
        nz = {i: round(float(w), 4) for i, w in enumerate(self.bins) if w > 0}
        return f"HueHistogram(sample_count={self.sample_count}, nonzero={nz})"


def build_histogram(pixels, min_saturation: float = DEFAULT_MIN_SATURATION) -> HueHistogram:
    """Bin the hues of sufficiently saturated pixels into 10-degree bins and normalize.

    Hue wraps: bin = floor(h / 10) mod 36. Returns an empty histogram when no
    pixel survives the saturation filter.
    """
    arr = as_hsv_array(pixels)
    counts, total = kernels.hue_bin_counts(arr[:, 0], arr[:, 1], min_saturation, N_BINS)
    if total == 0:
        return HueHistogram.empty()
    return HueHistogram(counts / float(total), total)


def similarity(a: HueHistogram, b: HueHistogram) -> float:
    """Histogram intersection, sum_i min(a_i, b_i), in [0, 1]."""
    if a.is_empty or b.is_empty:
        raise NoAppearanceDataError("cannot compare an empty histogram")
    return float(np.minimum(a.bins, b.bins).sum())


def is_target(score: float, threshold: float = DEFAULT_THRESHOLD) -> bool:
    # strictly greater: a score equal to the threshold does not qualify
    return score > threshold


@dataclass(frozen=True)
class Template:
    histogram: HueHistogram
    label: str = ""
    min_saturation: float = DEFAULT_MIN_SATURATION

    def __post_init__(self) -> None:
        if self.histogram.is_empty:
            raise NoAppearanceDataError("template histogram is empty")

    @classmethod
    def from_pixels(cls, pixels, label: str = "", min_saturation: float = DEFAULT_MIN_SATURATION) -> Template:
        return cls(build_histogram(pixels, min_saturation), label, min_saturation)

    def to_dict(self) -> dict:
        return {
            "schema_version": TEMPLATE_SCHEMA_VERSION,
            "label": self.label,
            "bins": [float(w) for w in self.histogram.bins],
            "sample_count": self.histogram.sample_count,
            "min_saturation": self.min_saturation,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Template:
        try:
            hist = HueHistogram(doc["bins"], int(doc["sample_count"]))
            return cls(hist, str(doc.get("label", "")), float(doc["min_saturation"]))
        except KeyError as exc:
            raise ParameterError(f"template document missing field {exc}") from None

    def dumps(self) -> str:
        # json writes floats with repr(), which round-trips bit-exactly
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> Template:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> Template:
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def hue_distance_deg(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


__all__ = [
    "N_BINS",
    "HsvPixel",
    "HueHistogram",
    "RgbPixel",
    "Template",
    "build_histogram",
    "is_target",
    "rgb_to_hsv",
    "rgb_to_hsv_array",
    "similarity",
]
