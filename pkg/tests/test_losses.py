import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eyeopt.losses import (
    EPS,
    FocalParams,
    SegLossWeights,
    cross_entropy_loss,
    dice_loss,
    fn_penalty,
    focal_loss,
    seg_loss,
    total_loss,
    total_loss_grad,
)

probs = st.floats(0.0, 1.0, allow_nan=False)


# --- Dice and cross-entropy ---------------------------------------------------


def test_dice_examples():
    assert dice_loss([1, 0, 1, 1], [1, 0, 1, 1]) == 0.0
    assert dice_loss([1, 1, 0, 0], [0, 0, 1, 1]) == 1.0
    assert dice_loss([1, 1, 0, 0], [1, 0, 1, 0]) == 0.5


def test_dice_undefined():
    with pytest.raises(ValueError, match="undefined Dice"):
        dice_loss([0, 0, 0], [0, 0, 0])


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30).filter(any))
def test_dice_self_zero(bits):
    assert dice_loss(bits, bits) == 0.0


@given(st.lists(st.tuples(probs, probs), min_size=1, max_size=30))
def test_dice_range(pairs):
    p, g = map(np.array, zip(*pairs))
    if p.sum() + g.sum() == 0:
        return
    assert 0.0 <= dice_loss(p, g) <= 1.0


def test_ce_examples():
    assert cross_entropy_loss([0.5], [1]) == pytest.approx(math.log(2), rel=1e-12)
    assert cross_entropy_loss([0.9], [0]) == pytest.approx(-math.log(0.1), rel=1e-12)
    assert cross_entropy_loss([1, 0, 1], [1, 0, 1]) < 1e-6


def test_inputs_validated():
    with pytest.raises(ValueError):
        dice_loss([0.5, 0.5], [1])
    with pytest.raises(ValueError):
        cross_entropy_loss([1.2], [1])
    with pytest.raises(ValueError):
        focal_loss([0.5], [-0.1])


# --- segmentation combination -------------------------------------------------


def test_seg_weights_select_components():
    p, g = [1, 1, 0, 0], [1, 0, 1, 0]
    assert seg_loss(p, g, SegLossWeights(1, 0)) == dice_loss(p, g)
    assert seg_loss(p, g, SegLossWeights(0, 1)) == cross_entropy_loss(p, g)
    assert seg_loss(p, g, SegLossWeights(1, 1)) == 0.5 + cross_entropy_loss(p, g)


def test_seg_weights_validation():
    with pytest.raises(ValueError):
        SegLossWeights(0, 0)
    with pytest.raises(ValueError):
        SegLossWeights(-1, 1)


@settings(max_examples=50)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(0, 2**32 - 1))
def test_seg_linear_in_weights(a, b, seed):
    rng = np.random.default_rng(seed)
    p, g = rng.random(16), (rng.random(16) < 0.5).astype(float)
    g[0] = 1.0
    # splitting the weights along components is exact
    assert seg_loss(p, g, SegLossWeights(a, b)) == seg_loss(p, g, SegLossWeights(a, 0)) + seg_loss(
        p, g, SegLossWeights(0, b)
    )
    # general split, exact up to one rounding of the outer sum
    w1, w2 = SegLossWeights(a, b), SegLossWeights(b, a)
    lhs = seg_loss(p, g, SegLossWeights(a + b, a + b))
    assert lhs == pytest.approx(seg_loss(p, g, w1) + seg_loss(p, g, w2), rel=1e-14)


# --- focal, false-negative and total ------------------------------------------


def test_focal_hand_value():
    expected = 0.25 * 0.01 * -math.log(0.9)
    assert focal_loss([0.9], [1]) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.634e-4, abs=5e-8)


def test_focal_perfect():
    assert focal_loss([1.0], [1]) < 1e-12
    assert focal_loss([0.0], [0]) < 1e-12


def test_focal_gamma0_is_half_bce():
    rng = np.random.default_rng(3)
    fp = FocalParams(alpha=0.5, gamma=0.0)
    for _ in range(20):
        yhat, y = rng.uniform(0.01, 0.99), float(rng.integers(0, 2))
        assert focal_loss([yhat], [y], fp) == pytest.approx(0.5 * cross_entropy_loss([yhat], [y]), rel=1e-12)


@given(st.floats(0, 1), st.floats(0, 1))
def test_focal_monotone(a, b):
    lo, hi = sorted((a, b))
    assert focal_loss([lo], [1]) >= focal_loss([hi], [1]) >= 0
    assert focal_loss([lo], [0]) <= focal_loss([hi], [0])


def test_fn_penalty_examples():
    assert fn_penalty([0.3, 0.9], [0, 0]) == 0.0
    assert fn_penalty([0.2], [1]) == pytest.approx(0.8)
    assert fn_penalty([1.0], [1]) == 0.0


def test_total_examples():
    assert total_loss([0.9], [1]) == pytest.approx(0.25 * 0.01 * -math.log(0.9) + 0.05, rel=1e-12)
    assert total_loss([0.9], [1]) == pytest.approx(0.0502634, abs=5e-8)
    fp0 = FocalParams(beta_fn=0.0)
    assert total_loss([0.3, 0.7], [1, 0], fp0) == focal_loss([0.3, 0.7], [1, 0], fp0)
    assert total_loss([0.6], [0]) == focal_loss([0.6], [0])


def test_focal_params_validation():
    for kw in ({"alpha": 0}, {"alpha": 1}, {"gamma": -1}, {"beta_fn": -0.1}):
        with pytest.raises(ValueError):
            FocalParams(**kw)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 2.0, 3.0])
def test_total_gradient_finite_difference(gamma):
    rng = np.random.default_rng(7)
    fp = FocalParams(gamma=gamma)
    h = 1e-6
    for _ in range(50):
        yhat = rng.uniform(0.01, 0.99)
        y = float(rng.integers(0, 2))
        g = total_loss_grad([yhat], [y], fp)[0]
        num = (total_loss([yhat + h], [y], fp) - total_loss([yhat - h], [y], fp)) / (2 * h)
        assert abs(g - num) <= 1e-5 * max(abs(num), 1e-12) + 1e-9


def test_gradient_flat_under_clamp():
    g = total_loss_grad([0.0, 1.0], [0, 1])
    assert g[0] == 0.0
    assert g[1] == -0.5  # only the false-negative term remains
    assert EPS == 1e-7
