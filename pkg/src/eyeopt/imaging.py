"""Fundus image standardization.

Images are plain numpy arrays:

* RGB image: ``uint8`` array of shape ``(height, width, 3)``
* gray image: ``uint8`` array of shape ``(height, width)``
* binary mask: ``bool`` array of shape ``(height, width)``

The pipeline converts to gray, picks an Otsu threshold, keeps the largest
bright component as the fundus, then crops a square window around it,
resamples to a fixed size and blanks everything outside the inscribed circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "DiskGeometry",
    "NoForegroundError",
    "rgb_to_gray",
    "compute_histogram",
    "otsu_threshold",
    "make_binary_mask",
    "estimate_center_radius",
    "crop_and_resize",
    "apply_circular_mask",
    "standardize",
    "read_png",
    "write_png",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class NoForegroundError(ValueError):
    """Raised when a mask contains no foreground pixel."""

    def __init__(self, msg: str = "no foreground"):
        super().__init__(msg)


@dataclass(frozen=True)
class DiskGeometry:
    """Center (column, row) and radius of the fundus disk, in pixels."""

    center_x: float
    center_y: float
    radius: float


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _check_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    return img


def rgb_to_gray(img: np.ndarray) -> np.ndarray:
    """Luma conversion ``round(0.299 R + 0.587 G + 0.114 B)`` to ``uint8``."""
    img = _check_rgb(img).astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * img[..., 0] + wg * img[..., 1] + wb * img[..., 2]
    return np.clip(_round_half_up(luma), 0, 255).astype(np.uint8)


def compute_histogram(img: np.ndarray) -> np.ndarray:
    """256-bin intensity histogram of a gray image (``int64`` counts)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {img.shape}")
    return np.bincount(img.ravel().astype(np.int64), minlength=256)[:256]


def otsu_threshold(hist) -> int:
    """Otsu threshold of a 256-bin histogram.

    Returns the split point ``t`` (class 0 is ``<= t``) maximizing the
    between-class variance ``w0 * w1 * (mu0 - mu1) ** 2``. The comparison is
    done in exact integer arithmetic, using the identity

        w0 w1 (mu0 - mu1)^2 = (N S0 - S n0)^2 / (N^2 n0 n1)

    so ties are real ties and the lowest maximizing ``t`` wins. Split points
    outside ``[lowest occupied bin, highest occupied bin]`` leave one class
    empty; they are not considered, which makes a single-valued histogram
    return its occupied bin.
    """
    counts = [int(c) for c in np.asarray(hist).ravel()]
    if len(counts) != 256:
        raise ValueError(f"expected 256 bins, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError("histogram counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ValueError("empty histogram")
    occupied = [v for v, c in enumerate(counts) if c]
    lo, hi = occupied[0], occupied[-1]
    if lo == hi:
        return lo

    weighted_total = sum(v * c for v, c in enumerate(counts))
    best_t = lo
    best_num, best_den = -1, 1
    n0 = s0 = 0
    for t in range(hi):
        n0 += counts[t]
        s0 += t * counts[t]
        if t < lo:
            continue
        num = (total * s0 - weighted_total * n0) ** 2
        den = n0 * (total - n0)
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def make_binary_mask(img: np.ndarray, t: int) -> np.ndarray:
    """Foreground where intensity is strictly above ``t``."""
    return np.asarray(img) > t


def estimate_center_radius(mask: np.ndarray) -> DiskGeometry:
    """Centroid and area-equivalent radius of the largest 4-connected component."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask)
    if n == 0:
        raise NoForegroundError()
    sizes = np.bincount(labels.ravel())[1:]
    biggest = int(np.argmax(sizes)) + 1
    rows, cols = np.nonzero(labels == biggest)
    area = rows.size
    return DiskGeometry(
        center_x=float(cols.mean()),
        center_y=float(rows.mean()),
        radius=float(np.sqrt(area / np.pi)),
    )


def _bilinear(channel: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample ``channel`` at fractional (row, col) grids; outside the pixel
    footprint ``[-0.5, n - 0.5]`` the result is 0."""
    h, w = channel.shape
    inside = (ys >= -0.5) & (ys <= h - 0.5) & (xs >= -0.5) & (xs <= w - 0.5)
    yc = np.clip(ys, 0, h - 1)
    xc = np.clip(xs, 0, w - 1)
    y0 = np.floor(yc).astype(np.intp)
    x0 = np.floor(xc).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = yc - y0
    fx = xc - x0
    c = channel.astype(np.float64)
    top = c[y0, x0] * (1 - fx) + c[y0, x1] * fx
    bottom = c[y1, x0] * (1 - fx) + c[y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    return np.where(inside, out, 0.0)


def crop_and_resize(img: np.ndarray, geom: DiskGeometry, out_size: int = 512) -> np.ndarray:
    """Extract the ``2r x 2r`` window centered on the disk and resample it
    bilinearly to ``out_size x out_size``. Regions past the border are black."""
    img = _check_rgb(img)
    if out_size < 16:
        raise ValueError(f"out_size must be >= 16, got {out_size}")
    if geom.radius <= 0:
        raise ValueError("radius must be positive")
    scale = 2.0 * geom.radius / out_size
    # pixel k covers [k - 0.5, k + 0.5]; sample at output pixel centers
    steps = (np.arange(out_size) + 0.5) * scale
    xs = geom.center_x - geom.radius + steps
    ys = geom.center_y - geom.radius + steps
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    out = np.empty((out_size, out_size, 3), dtype=np.uint8)
    for ch in range(3):
        sampled = _bilinear(img[..., ch], yy, xx)
        out[..., ch] = np.clip(_round_half_up(sampled), 0, 255).astype(np.uint8)
    return out


def circle_mask(side: int) -> np.ndarray:
    """Pixels within ``side / 2`` of the center of a ``side x side`` grid."""
    c = (side - 1) / 2.0
    yy, xx = np.mgrid[0:side, 0:side]
    return (yy - c) ** 2 + (xx - c) ** 2 <= (side / 2.0) ** 2


def apply_circular_mask(img: np.ndarray) -> np.ndarray:
    """Black out pixels farther than half the side from the image center."""
    img = _check_rgb(img)
    h, w = img.shape[:2]
    if h != w:
        raise ValueError(f"circular mask needs a square image, got {h}x{w}")
    out = img.copy()
    out[~circle_mask(h)] = 0
    return out


def standardize(img: np.ndarray, out_size: int = 512) -> np.ndarray:
    """Full standardization pipeline: gray, Otsu, mask, disk fit, crop, circle."""
    img = _check_rgb(img)
    gray = rgb_to_gray(img)
    t = otsu_threshold(compute_histogram(gray))
    mask = make_binary_mask(gray, t)
    geom = estimate_center_radius(mask)
    return apply_circular_mask(crop_and_resize(img, geom, out_size))


def read_png(path: str | Path, mode: str = "RGB") -> np.ndarray:
    """Read an image file as a ``uint8`` array in the given Pillow mode."""
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert(mode), dtype=np.uint8).copy()


def write_png(path: str | Path, img: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8)).save(path, format="PNG")
