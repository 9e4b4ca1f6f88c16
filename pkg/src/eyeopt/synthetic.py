"""Synthetic rasters for tests and demos."""

from __future__ import annotations

import numpy as np


def disk_mask(shape, center, radius) -> np.ndarray:
    """Filled raster circle: pixels whose center lies within ``radius``.

    ``center`` is ``(x, y)`` = (column, row).
    """
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    cx, cy = center
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2


def fundus_image(
    shape=(600, 800),
    center=(350.3, 280.7),
    radius=230.0,
    rim_width=8.0,
    background=4.0,
) -> np.ndarray:
    """Reddish fundus-like disk on a dark field.

    Brightness falls off radially, carries a faint periodic texture and fades
    to the background over ``rim_width`` pixels, like a vignetted photograph.
    """
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = center
    d = np.hypot(xx - cx, yy - cy)
    fade = np.clip((radius - d) / rim_width + 0.5, 0.0, 1.0)
    texture = 8.0 * np.sin(xx / 15.0) * np.cos(yy / 21.0)
    base = (170.0 - 40.0 * (d / radius) ** 2 + texture) * fade + background
    rgb = np.stack([base, 0.6 * base, 0.3 * base], axis=-1)
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def line_image(shape=(64, 64), row=32, width=3, line=60, field=200, vertical=False) -> np.ndarray:
    """Constant field crossed by a straight band of a different intensity."""
    img = np.full(shape, field, dtype=np.uint8)
    lo = row - width // 2
    if vertical:
        img[:, lo : lo + width] = line
    else:
        img[lo : lo + width, :] = line
    return img
