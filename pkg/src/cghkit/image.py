"""Complex-field construction, masks, region iteration and view rendering.

Fields are dense row-major ``complex128`` arrays of shape ``(height,
width)``; masks are boolean arrays of the same shape. Rendering follows a
fixed pipeline keyed by a four-part :class:`ViewKey` (transform, view,
colormap, scale) so expensive visualizations can be memoized in a
:class:`GenericCache` on exactly that quadruple.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .colormaps import COLORMAPS, apply_colormap
from .errors import (
    EmptyImageError,
    NonFiniteError,
    OutOfBoundsError,
    ZeroChunkError,
)
from .propagation import fft2

TRANSFORMS = ("none", "fft", "ifft")
VIEWS = ("amplitude", "phase", "intensity", "real", "imag")
SCALES = ("linear", "log")

# Log display curve: t -> log(1 + t * 10^3) / log(1 + 10^3) on the
# normalized scalar; 10^3 resolves typical replay dynamic range.
_LOG_GAIN = 1e3


@dataclass(frozen=True)
class ViewKey:
    """Complete cache key for one rendering of a field."""

    transform: str = "none"
    view: str = "amplitude"
    colormap: str = "gray"
    scale: str = "linear"

    def __post_init__(self):
        for value, allowed, label in (
            (self.transform, TRANSFORMS, "transform"),
            (self.view, VIEWS, "view"),
            (self.colormap, COLORMAPS, "colormap"),
            (self.scale, SCALES, "scale"),
        ):
            if value not in allowed:
                raise ValueError(f"{label} must be one of {', '.join(allowed)}; got {value!r}")


def from_grayscale(pixels) -> np.ndarray:
    """8-bit luminance grid -> complex field with amplitude v/255, phase 0."""
    pixels = np.asarray(pixels)
    if pixels.size == 0:
        raise EmptyImageError("empty input image")
    return (pixels.astype(np.float64) / 255.0).astype(np.complex128)


def render(field, key: ViewKey) -> np.ndarray:
    """Render a complex field to 8-bit RGB.

    Pipeline: optional centered transform, per-pixel view scalar
    (amplitude ``|z|``, phase ``arg z`` wrapped from [-pi, pi) onto
    [0, 1), intensity ``|z|^2``, raw real/imag), min-max normalization
    over the whole frame (a constant frame renders mid-gray), optional
    log curve, colormap lookup. Equal field and key give byte-identical
    output.
    """
    field = np.asarray(field, dtype=np.complex128)
    if not np.all(np.isfinite(field)):
        raise NonFiniteError("field contains NaN or Inf")
    if key.transform == "fft":
        field = fft2(field, "forward")
    elif key.transform == "ifft":
        field = fft2(field, "inverse")

    if key.view == "amplitude":
        scalar = np.abs(field)
    elif key.view == "phase":
        scalar = np.mod(np.angle(field) + np.pi, 2.0 * np.pi) / (2.0 * np.pi)
    elif key.view == "intensity":
        scalar = field.real**2 + field.imag**2
    elif key.view == "real":
        scalar = field.real
    else:
        scalar = field.imag

    lo = scalar.min()
    hi = scalar.max()
    if hi > lo:
        scalar = (scalar - lo) / (hi - lo)
    else:
        scalar = np.full_like(scalar, 0.5)

    if key.scale == "log":
        scalar = np.log1p(scalar * _LOG_GAIN) / np.log1p(_LOG_GAIN)

    return apply_colormap(scalar, key.colormap)


class GenericCache:
    """Memoizes expensive results on keys of up to four components.

    The compute callable runs at most once per distinct key for the
    cache's lifetime; the lock is held across the compute so concurrent
    readers observe at-most-once semantics. Failures propagate and are
    not cached.
    """

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key, compute):
        with self._lock:
            if key in self._store:
                return self._store[key]
            value = compute()
            self._store[key] = value
            return value

    def __len__(self):
        return len(self._store)


class ImageCache:
    """Rendered views of one field, memoized per :class:`ViewKey`."""

    def __init__(self, field):
        self._field = field
        self._cache = GenericCache()

    def render(self, key: ViewKey):
        return self._cache.get_or_compute(
            (key.transform, key.view, key.colormap, key.scale),
            lambda: render(self._field, key),
        )


def region_chunks(width: int, height: int, chunk: int):
    """Yield ``(x, y, w, h)`` chunk-square regions tiling the grid.

    Regions are row-major, pairwise disjoint and cover the grid; ragged
    right/bottom edges yield clipped rectangles.
    """
    if chunk < 1:
        raise ZeroChunkError("chunk size must be >= 1")
    for y in range(0, height, chunk):
        for x in range(0, width, chunk):
            yield (x, y, min(chunk, width - x), min(chunk, height - y))


def rect_mask(width: int, height: int, rects=()) -> np.ndarray:
    """Boolean mask from a union of rectangles.

    An empty rectangle list means the full plane is the signal region.
    """
    if not rects:
        return np.ones((height, width), dtype=bool)
    mask = np.zeros((height, width), dtype=bool)
    for x, y, w, h in rects:
        if x < 0 or y < 0 or w < 0 or h < 0 or x + w > width or y + h > height:
            raise OutOfBoundsError(f"rect {(x, y, w, h)} outside {width}x{height}")
        mask[y : y + h, x : x + w] = True
    return mask
