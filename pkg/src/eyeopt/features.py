"""Optic nerve head features from a gray image and disc/cup masks.

Anatomical metrics (areas, cup-to-disc ratios, neuroretinal rim and its
ISNT quadrants), Haralick GLCM texture statistics and a multi-scale Frangi
vesselness summary.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage

from .imaging import otsu_threshold

__all__ = [
    "SegmentationMasks",
    "TextureFeatures",
    "VesselSummary",
    "IsntAreas",
    "FeatureRecord",
    "FrangiParams",
    "EmptyDiscError",
    "mask_area",
    "cdr_area",
    "cdr_axes",
    "nrr_area",
    "isnt_areas",
    "quantize",
    "glcm_compute",
    "glcm_features",
    "gaussian_derivative_kernels",
    "hessian_at_scale",
    "frangi_vesselness",
    "vessel_summary",
    "extract_features",
    "DEFAULT_OFFSETS",
]

Laterality = Literal["right", "left"]

DEFAULT_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))
DEFAULT_LEVELS = 8


class EmptyDiscError(ValueError):
    def __init__(self, msg: str = "empty disc"):
        super().__init__(msg)


@dataclass(frozen=True)
class SegmentationMasks:
    disc: np.ndarray
    cup: np.ndarray

    def __post_init__(self):
        disc = np.asarray(self.disc, dtype=bool)
        cup = np.asarray(self.cup, dtype=bool)
        if disc.ndim != 2 or disc.shape != cup.shape:
            raise ValueError(f"disc and cup masks must be 2-D and equal in shape, got {disc.shape} and {cup.shape}")
        object.__setattr__(self, "disc", disc)
        object.__setattr__(self, "cup", cup)

    @property
    def cup_within_disc(self) -> bool:
        """Validity flag: every cup pixel is also a disc pixel."""
        return not bool(np.any(self.cup & ~self.disc))


@dataclass(frozen=True)
class TextureFeatures:
    contrast: float
    dissimilarity: float
    homogeneity: float
    energy: float
    correlation: float
    asm: float


@dataclass(frozen=True)
class VesselSummary:
    mean_vesselness: float
    max_vesselness: float
    vessel_density: float


@dataclass(frozen=True)
class IsntAreas:
    inferior: int
    superior: int
    nasal: int
    temporal: int

    @property
    def total(self) -> int:
        return self.inferior + self.superior + self.nasal + self.temporal


@dataclass(frozen=True)
class FeatureRecord:
    disc_area: int
    cup_area: int
    cdr_area: float
    cdr_vertical: float
    cdr_horizontal: float
    nrr_area: int
    isnt: IsntAreas
    texture: TextureFeatures
    vessels: VesselSummary

    def to_dict(self) -> dict:
        return asdict(self)

    def to_row(self) -> list[float]:
        """Flat values in the column order of :data:`eyeopt.runio.FEATURE_COLUMNS`."""
        t, v, q = self.texture, self.vessels, self.isnt
        return [
            self.disc_area, self.cup_area, self.cdr_area, self.cdr_vertical,
            self.cdr_horizontal, self.nrr_area,
            q.inferior, q.superior, q.nasal, q.temporal,
            t.contrast, t.dissimilarity, t.homogeneity, t.energy, t.correlation, t.asm,
            v.mean_vesselness, v.max_vesselness, v.vessel_density,
        ]


@dataclass(frozen=True)
class FrangiParams:
    """``c=None`` means auto: half the largest structureness at each scale."""

    beta: float = 0.5
    c: float | None = None
    scales: tuple[float, ...] = field(default=(1.0, 2.0, 4.0, 8.0))

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be > 0 or None")
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError("scales must be a nonempty list of positive values")


# ---------------------------------------------------------------------------
# anatomical metrics
# ---------------------------------------------------------------------------


def mask_area(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask))


def _require_disc(masks: SegmentationMasks) -> int:
    a = mask_area(masks.disc)
    if a == 0:
        raise EmptyDiscError()
    return a


def cdr_area(masks: SegmentationMasks) -> float:
    """Cup area over disc area."""
    return mask_area(masks.cup) / _require_disc(masks)


def _extent(mask: np.ndarray) -> tuple[int, int]:
    """Tight inclusive bounding-box (height, width); (0, 0) when empty."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        return 0, 0
    return int(rows[-1] - rows[0] + 1), int(cols[-1] - cols[0] + 1)


def cdr_axes(masks: SegmentationMasks) -> tuple[float, float]:
    """(vertical, horizontal) cup-to-disc ratios from bounding-box extents."""
    _require_disc(masks)
    hd, wd = _extent(masks.disc)
    hc, wc = _extent(masks.cup)
    return hc / hd, wc / wd


def nrr_area(masks: SegmentationMasks) -> int:
    """Disc area minus cup area, clamped at zero for inconsistent masks."""
    return max(0, mask_area(masks.disc) - mask_area(masks.cup))


def isnt_areas(masks: SegmentationMasks, laterality: Laterality = "right") -> IsntAreas:
    """Split rim pixels (disc and not cup) into four 90-degree sectors.

    Angles are measured about the disc centroid, counter-clockwise from the
    image +x axis with "up" being superior. Sector boundaries sit at 45, 135,
    225 and 315 degrees; each sector owns its counter-clockwise-start ray.
    For a right eye the temporal side is image-left.
    """
    if laterality not in ("right", "left"):
        raise ValueError(f"laterality must be 'right' or 'left', got {laterality!r}")
    _require_disc(masks)
    rows, cols = np.nonzero(masks.disc)
    cy, cx = rows.mean(), cols.mean()
    rim_r, rim_c = np.nonzero(masks.disc & ~masks.cup)
    dx = rim_c - cx
    dy = cy - rim_r
    a = dy - dx
    b = dy + dx
    superior = (a >= 0) & (b > 0)
    left = (a > 0) & (b <= 0)
    inferior = (a <= 0) & (b < 0)
    right = ~(superior | left | inferior)
    n_left, n_right = int(left.sum()), int(right.sum())
    temporal, nasal = (n_left, n_right) if laterality == "right" else (n_right, n_left)
    return IsntAreas(
        inferior=int(inferior.sum()),
        superior=int(superior.sum()),
        nasal=nasal,
        temporal=temporal,
    )


# ---------------------------------------------------------------------------
# GLCM texture
# ---------------------------------------------------------------------------


def quantize(img: np.ndarray, levels: int) -> np.ndarray:
    """Map 8-bit intensities onto ``levels`` equal-width bins over [0, 255]."""
    img = np.asarray(img).astype(np.int64)
    return np.clip(img * levels // 256, 0, levels - 1)


def glcm_compute(
    img: np.ndarray,
    roi: np.ndarray | None = None,
    levels: int = DEFAULT_LEVELS,
    offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS,
    *,
    prequantized: bool = False,
) -> np.ndarray:
    """Symmetric, normalized gray-level co-occurrence matrix.

    Pairs ``(r, c)`` and ``(r + dy, c + dx)`` are counted for every offset when
    both pixels are inside the image and the ROI, in both orders. With
    ``prequantized=True`` the image already holds levels in ``[0, levels)``.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if not offsets:
        raise ValueError("offsets must be nonempty")
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("glcm needs a 2-D image")
    if prequantized:
        q = img.astype(np.int64)
        if q.min() < 0 or q.max() >= levels:
            raise ValueError(f"prequantized image values must lie in [0, {levels})")
    else:
        q = quantize(img, levels)
    roi = np.ones(img.shape, dtype=bool) if roi is None else np.asarray(roi, dtype=bool)
    h, w = q.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    for dy, dx in offsets:
        r0, r1 = max(0, -dy), min(h, h - dy)
        c0, c1 = max(0, -dx), min(w, w - dx)
        if r0 >= r1 or c0 >= c1:
            continue
        a = q[r0:r1, c0:c1]
        b = q[r0 + dy : r1 + dy, c0 + dx : c1 + dx]
        ok = roi[r0:r1, c0:c1] & roi[r0 + dy : r1 + dy, c0 + dx : c1 + dx]
        np.add.at(counts, (a[ok], b[ok]), 1)
    counts = counts + counts.T
    total = counts.sum()
    if total == 0:
        raise ValueError("degenerate ROI")
    return counts / total


def glcm_features(p: np.ndarray) -> TextureFeatures:
    """Haralick statistics of a normalized GLCM.

    Correlation is defined as 1 when either marginal has zero variance
    (a constant region correlates perfectly with itself).
    """
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    i, j = np.mgrid[0:n, 0:n].astype(np.float64)
    diff = i - j
    contrast = float(np.sum(p * diff**2))
    dissimilarity = float(np.sum(p * np.abs(diff)))
    homogeneity = float(np.sum(p / (1.0 + diff**2)))
    asm = float(np.sum(p**2))
    mu_i = np.sum(p * i)
    mu_j = np.sum(p * j)
    sd_i = np.sqrt(np.sum(p * (i - mu_i) ** 2))
    sd_j = np.sqrt(np.sum(p * (j - mu_j) ** 2))
    if sd_i * sd_j < 1e-12:
        correlation = 1.0
    else:
        correlation = float(np.sum(p * (i - mu_i) * (j - mu_j)) / (sd_i * sd_j))
    return TextureFeatures(
        contrast=contrast,
        dissimilarity=dissimilarity,
        homogeneity=homogeneity,
        energy=float(np.sqrt(asm)),
        correlation=correlation,
        asm=asm,
    )


# ---------------------------------------------------------------------------
# Hessian and Frangi vesselness
# ---------------------------------------------------------------------------


def gaussian_derivative_kernels(sigma: float, truncate: float = 4.0):
    """Sampled 1-D Gaussian kernels of order 0, 1 and 2, laid out for
    correlation (``out[i] = sum_t k[t] f[i + t]``).

    Moments are pinned so the kernels are exact on polynomials up to degree
    three despite sampling and truncation: ``sum g = 1``, ``sum d1 = 0``,
    ``sum d1 t = 1``, ``sum d2 = 0``, ``sum d2 t^2 / 2 = 1``.
    """
    radius = max(1, int(np.ceil(truncate * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (t / sigma) ** 2)
    g /= g.sum()
    d1 = t / sigma**2 * g
    d1 /= np.sum(d1 * t)
    d2 = (t**2 / sigma**4 - 1.0 / sigma**2) * g
    d2 -= d2.sum() * g
    d2 /= 0.5 * np.sum(d2 * t**2)
    return g, d1, d2


def hessian_at_scale(img: np.ndarray, sigma: float):
    """Scale-normalized Hessian ``sigma^2 * (Hrr, Hrc, Hcc)``.

    ``Hcc`` is the second derivative along columns (x), ``Hrr`` along rows (y).
    Borders are reflect-padded.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    f = np.asarray(img, dtype=np.float64)
    g, d1, d2 = gaussian_derivative_kernels(sigma)

    def sep(k_rows, k_cols):
        tmp = ndimage.correlate1d(f, k_rows, axis=0, mode="reflect")
        return ndimage.correlate1d(tmp, k_cols, axis=1, mode="reflect")

    s2 = sigma**2
    return s2 * sep(d2, g), s2 * sep(d1, d1), s2 * sep(g, d2)


def _eig_sorted(hrr, hrc, hcc):
    """Eigenvalues of the symmetric 2x2 Hessian ordered so ``|l1| <= |l2|``."""
    half_tr = 0.5 * (hrr + hcc)
    disc = np.sqrt((0.5 * (hrr - hcc)) ** 2 + hrc**2)
    a = half_tr + disc
    b = half_tr - disc
    swap = np.abs(a) < np.abs(b)
    l1 = np.where(swap, a, b)
    l2 = np.where(swap, b, a)
    return l1, l2


def frangi_vesselness(img: np.ndarray, params: FrangiParams = FrangiParams()) -> np.ndarray:
    """Multi-scale Frangi response for dark ridges on a brighter background.

    Per scale, with ``|l1| <= |l2|``::

        Rb = l1 / l2,  S = sqrt(l1^2 + l2^2)
        v  = exp(-Rb^2 / (2 beta^2)) * (1 - exp(-S^2 / (2 c^2)))   if l2 > 0 else 0

    and the result is the pixelwise maximum over scales, in ``[0, 1]``.
    """
    f = np.asarray(img, dtype=np.float64)
    f = f - f.mean()
    out = np.zeros(f.shape, dtype=np.float64)
    two_b2 = 2.0 * params.beta**2
    for sigma in params.scales:
        l1, l2 = _eig_sorted(*hessian_at_scale(f, sigma))
        s = np.sqrt(l1**2 + l2**2)
        c = params.c if params.c is not None else 0.5 * float(s.max())
        if c <= 1e-12:
            continue
        ridge = l2 > 0
        rb = np.divide(l1, l2, out=np.zeros_like(l1), where=ridge)
        v = np.exp(-(rb**2) / two_b2) * (1.0 - np.exp(-(s**2) / (2.0 * c**2)))
        np.maximum(out, np.where(ridge, v, 0.0), out=out)
    return np.clip(out, 0.0, 1.0)


def vessel_summary(v: np.ndarray, roi: np.ndarray | None = None) -> VesselSummary:
    """Mean, max and Otsu-split density of a vesselness map inside ``roi``.

    The map is quantized to 256 levels before the Otsu split.
    """
    v = np.asarray(v, dtype=np.float64)
    roi = np.ones(v.shape, dtype=bool) if roi is None else np.asarray(roi, dtype=bool)
    vals = v[roi]
    if vals.size == 0:
        raise ValueError("empty roi")
    levels = np.clip(np.floor(vals * 255.0 + 0.5), 0, 255).astype(np.int64)
    t = otsu_threshold(np.bincount(levels, minlength=256))
    return VesselSummary(
        mean_vesselness=float(vals.mean()),
        max_vesselness=float(vals.max()),
        vessel_density=float(np.count_nonzero(levels > t) / vals.size),
    )


def extract_features(
    img: np.ndarray,
    masks: SegmentationMasks,
    laterality: Laterality = "right",
    *,
    levels: int = DEFAULT_LEVELS,
    offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS,
    frangi: FrangiParams = FrangiParams(),
) -> FeatureRecord:
    """Every feature for one eye. Texture and vessel statistics use the disc as ROI."""
    img = np.asarray(img)
    if img.shape != masks.disc.shape:
        raise ValueError(f"image shape {img.shape} does not match masks {masks.disc.shape}")
    disc_a = _require_disc(masks)
    vert, horiz = cdr_axes(masks)
    texture = glcm_features(glcm_compute(img, masks.disc, levels, offsets))
    vessels = vessel_summary(frangi_vesselness(img, frangi), masks.disc)
    return FeatureRecord(
        disc_area=disc_a,
        cup_area=mask_area(masks.cup),
        cdr_area=cdr_area(masks),
        cdr_vertical=vert,
        cdr_horizontal=horiz,
        nrr_area=nrr_area(masks),
        isnt=isnt_areas(masks, laterality),
        texture=texture,
        vessels=vessels,
    )
