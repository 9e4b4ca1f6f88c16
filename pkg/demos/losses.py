"""
Segmentation and screening losses
=================================

Dice plus cross-entropy for masks, focal loss plus a false-negative penalty
for the referable / non-referable decision. The penalty only touches positives,
so it raises the price of a miss and leaves false alarms alone.
Run with ``python demos/losses.py``.
"""

import numpy as np

from eyeopt.losses import FocalParams, SegLossWeights, dice_loss, focal_loss, seg_loss, total_loss

# a 1-D "mask" and a blurry prediction of it
truth = np.zeros(40)
truth[12:28] = 1
pred = np.clip(np.convolve(truth, np.ones(7) / 7, mode="same") + 0.05, 0, 1)
print(f"dice {dice_loss(pred, truth):.4f}, seg loss {seg_loss(pred, truth, SegLossWeights(1, 1)):.4f}")

plain = FocalParams(alpha=0.25, gamma=2.0, beta_fn=0.0)
fp = FocalParams(alpha=0.25, gamma=2.0, beta_fn=0.5)
print()
print("confidence   miss (beta 0)   miss (beta 0.5)   false alarm (either)")
for c in (0.6, 0.8, 0.95):
    print(f"   {c:.2f}        {total_loss([1 - c], [1], plain):.4f}          {total_loss([1 - c], [1], fp):.4f}"
          f"            {total_loss([c], [0], fp):.4f}")

# gamma down-weights easy examples: compare focal at gamma 0 and 2
print()
for yhat in (0.55, 0.9, 0.99):
    f0 = focal_loss([yhat], [1], FocalParams(gamma=0.0))
    f2 = focal_loss([yhat], [1], FocalParams(gamma=2.0))
    print(f"yhat {yhat:.2f}: focal gamma=0 {f0:.5f}, gamma=2 {f2:.6f}, ratio {f2 / f0:.4f}")
