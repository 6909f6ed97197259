"""Training objective for layout-conditioned synthesis, as pure functions.

Nothing here owns a network: discriminator scores and multi-scale features
arrive as plain arrays, so any extractor can be plugged in. All reductions
follow one convention — expectations become means over every element of a
score map — except ``perceptual``, whose per-level terms are unnormalized
L1 sums. That asymmetry with ``feature_matching`` is deliberate and must
not be "fixed".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonFinite, NonPositiveProbability, ShapeMismatch

_PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class FeatureStack:
    """Ordered multi-scale features from one extractor pass.

    ``provenance`` is a free-form label ("disc_scale0", "vgg", ...) used only
    in error messages.
    """

    levels: Sequence[np.ndarray]
    provenance: str = ""

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError(f"feature stack {self.provenance!r} has no levels")
        for i, lvl in enumerate(self.levels):
            if not np.isfinite(lvl).all():
                raise NonFinite(
                    f"level {i} of feature stack {self.provenance!r} is not finite"
                )


@dataclass(frozen=True)
class LossWeights:
    adv: float = 1.0
    fm: float = 10.0
    perc: float = 10.0
    seg: float = 1.0

    def __post_init__(self):
        for name in ("adv", "fm", "perc", "seg"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be nonnegative")


def hinge_d(d_real: np.ndarray, d_fake: np.ndarray) -> float:
    """Discriminator hinge loss: mean relu(1 - d_real) + mean relu(1 + d_fake).

    The two score maps are reduced independently, so they may differ in shape
    (e.g. multi-crop real scores against a single fake map). Zero exactly when
    every real score is >= 1 and every fake score is <= -1.
    """
    d_real = np.asarray(d_real, dtype=np.float64)
    d_fake = np.asarray(d_fake, dtype=np.float64)
    real_term = np.maximum(0.0, 1.0 - d_real).mean()
    fake_term = np.maximum(0.0, 1.0 + d_fake).mean()
    return float(real_term + fake_term)


def hinge_g(d_fake: np.ndarray) -> float:
    """Generator hinge loss: -mean(d_fake)."""
    return float(-np.asarray(d_fake, dtype=np.float64).mean())


def _paired_levels(a: FeatureStack, b: FeatureStack):
    if len(a.levels) != len(b.levels):
        raise ShapeMismatch(
            f"stacks {a.provenance!r} and {b.provenance!r} have "
            f"{len(a.levels)} vs {len(b.levels)} levels"
        )
    for i, (la, lb) in enumerate(zip(a.levels, b.levels)):
        if la.shape != lb.shape:
            raise ShapeMismatch(
                f"level {i}: {la.shape} vs {lb.shape} "
                f"({a.provenance!r} vs {b.provenance!r})"
            )
        yield la, lb


def feature_matching(real: FeatureStack, fake: FeatureStack) -> float:
    """Sum over levels of the mean absolute difference (L1 / element count)."""
    return float(sum(np.abs(la - lb).mean() for la, lb in _paired_levels(real, fake)))


def perceptual(real_feats: FeatureStack, fake_feats: FeatureStack) -> float:
    """Sum over levels of raw L1 distances, with no per-level normalization."""
    return float(
        sum(np.abs(la - lb).sum() for la, lb in _paired_levels(real_feats, fake_feats))
    )


def class_weights(seg_onehot: np.ndarray) -> np.ndarray:
    """Inverse-frequency weight per class: (positions) / (pixels of class i).

    A class with no pixels gets weight 0, which drops it from any weighted
    sum instead of dividing by zero. Counts pool the batch dimension, so the
    number of positions is N*H*W.
    """
    seg_onehot = np.asarray(seg_onehot, dtype=np.float64)
    if seg_onehot.ndim != 4:
        raise ShapeMismatch(f"layout must be (N, C, H, W), got {seg_onehot.shape}")
    n, _, h, w = seg_onehot.shape
    counts = seg_onehot.sum(axis=(0, 2, 3))
    weights = np.zeros_like(counts)
    present = counts > 0
    weights[present] = (n * h * w) / counts[present]
    return weights


def semantic_alignment(seg_onehot: np.ndarray, seg_probs_real: np.ndarray,
                       seg_probs_fake: np.ndarray) -> float:
    """Class-balanced cross-entropy of two per-pixel class predictions.

    -sum_i w_i sum_pixels S_i * (log p_real_i + log p_fake_i), with w_i from
    ``class_weights``. Probabilities below 1e-12 are floored there before the
    log, so exactly-zero entries (one-hot predictions at off-class positions,
    or a confident miss) give a large finite loss rather than NaN/inf.
    Negative entries are not probabilities at all and raise.
    """
    seg_onehot = np.asarray(seg_onehot, dtype=np.float64)
    for name, p in (("real", seg_probs_real), ("fake", seg_probs_fake)):
        if p.shape != seg_onehot.shape:
            raise ShapeMismatch(
                f"{name} predictions {p.shape} do not match layout {seg_onehot.shape}"
            )
        if (p < 0).any():
            raise NonPositiveProbability(f"{name} predictions contain negative entries")
    w = class_weights(seg_onehot)
    log_sum = (np.log(np.maximum(seg_probs_real, _PROB_FLOOR))
               + np.log(np.maximum(seg_probs_fake, _PROB_FLOOR)))
    per_class = (seg_onehot * log_sum).sum(axis=(0, 2, 3))
    return float(-(w * per_class).sum())


def total_loss(parts: Sequence[float], w: LossWeights) -> float:
    """Weighted sum of the four generator-side terms (adv_g, fm, perc, seg)."""
    adv_g, fm, perc_part, seg = (float(p) for p in parts)
    return w.adv * adv_g + w.fm * fm + w.perc * perc_part + w.seg * seg
