"""Segmentation and classification losses.

Segmentation: ``seg = lambda_dice * dice + lambda_ce * cross_entropy``.
Classification: ``total = focal + beta_fn * fn_penalty`` where the
false-negative penalty is ``y * (1 - yhat)``.

Array inputs are reduced by the mean. Probabilities entering a logarithm are
clamped to ``[eps, 1 - eps]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SegLossWeights",
    "FocalParams",
    "dice_loss",
    "cross_entropy_loss",
    "seg_loss",
    "focal_loss",
    "fn_penalty",
    "total_loss",
    "total_loss_grad",
]

EPS = 1e-7


@dataclass(frozen=True)
class SegLossWeights:
    lambda_dice: float = 1.0
    lambda_ce: float = 1.0

    def __post_init__(self):
        if self.lambda_dice < 0 or self.lambda_ce < 0:
            raise ValueError("loss weights must be non-negative")
        if self.lambda_dice == 0 and self.lambda_ce == 0:
            raise ValueError("loss weights must not both be zero")


@dataclass(frozen=True)
class FocalParams:
    alpha: float = 0.25
    gamma: float = 2.0
    beta_fn: float = 0.5
    eps: float = EPS

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.beta_fn < 0:
            raise ValueError("beta_fn must be >= 0")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")


def _pair(p, g):
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    if np.any((p < 0) | (p > 1)) or np.any((g < 0) | (g > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p, g


def dice_loss(p, g) -> float:
    """``1 - 2 sum(p g) / (sum p + sum g)``."""
    p, g = _pair(p, g)
    denom = p.sum() + g.sum()
    if denom == 0:
        raise ValueError("undefined Dice")
    return float(1.0 - 2.0 * np.sum(p * g) / denom)


def cross_entropy_loss(p, g, eps: float = EPS) -> float:
    """Mean binary cross-entropy."""
    p, g = _pair(p, g)
    q = np.clip(p, eps, 1 - eps)
    return float(np.mean(-(g * np.log(q) + (1 - g) * np.log1p(-q))))


def seg_loss(p, g, w: SegLossWeights = SegLossWeights(), eps: float = EPS) -> float:
    total = 0.0
    if w.lambda_dice:
        total += w.lambda_dice * dice_loss(p, g)
    if w.lambda_ce:
        total += w.lambda_ce * cross_entropy_loss(p, g, eps)
    return total


def _focal_terms(yhat, y, fp: FocalParams):
    yhat, y = _pair(yhat, y)
    q = np.clip(yhat, fp.eps, 1 - fp.eps)
    pos = -fp.alpha * (1 - q) ** fp.gamma * y * np.log(q)
    neg = -(1 - fp.alpha) * q**fp.gamma * (1 - y) * np.log1p(-q)
    return pos + neg


def focal_loss(yhat, y, fp: FocalParams = FocalParams()) -> float:
    """Mean focal loss."""
    return float(np.mean(_focal_terms(yhat, y, fp)))


def fn_penalty(yhat, y) -> float:
    """Mean of ``y * (1 - yhat)``."""
    yhat, y = _pair(yhat, y)
    return float(np.mean(y * (1 - yhat)))


def total_loss(yhat, y, fp: FocalParams = FocalParams()) -> float:
    return focal_loss(yhat, y, fp) + fp.beta_fn * fn_penalty(yhat, y)


def total_loss_grad(yhat, y, fp: FocalParams = FocalParams()) -> np.ndarray:
    """Elementwise derivative of the *per-element* total loss w.r.t. ``yhat``.

    Zero in the focal part where the clamp is active.
    """
    yhat, y = _pair(yhat, y)
    a, gam = fp.alpha, fp.gamma
    q = np.clip(yhat, fp.eps, 1 - fp.eps)
    active = (yhat > fp.eps) & (yhat < 1 - fp.eps)
    # d/dq of -a (1-q)^g ln q
    if gam == 0:
        d_pos = -a / q
        d_neg = (1 - a) / (1 - q)
    else:
        d_pos = a * (gam * (1 - q) ** (gam - 1) * np.log(q) - (1 - q) ** gam / q)
        d_neg = -(1 - a) * (gam * q ** (gam - 1) * np.log1p(-q) - q**gam / (1 - q))
    focal = np.where(active, y * d_pos + (1 - y) * d_neg, 0.0)
    return focal - fp.beta_fn * y
