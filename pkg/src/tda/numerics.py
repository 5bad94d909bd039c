"""Dense math primitives shared by every other module.

All functions are pure and operate on numpy arrays. Computation is
float64 throughout; float32 appears only at the file-format boundary.
Similarities are plain dot products, so inputs are expected to be
unit-norm (`l2_normalize` enforces this).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDimension, InvalidFeature


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale `v` to unit L2 norm, preserving direction.

    Raises InvalidFeature on non-finite entries or a zero vector.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidFeature("feature contains non-finite entries")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidFeature("cannot normalize a zero vector")
    return v / norm


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-subtraction), float64 output."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def normalized_entropy(p: np.ndarray) -> float:
    """Shannon entropy of `p` divided by ln(N), in [0, 1].

    The ln(N) normalization makes the value comparable across datasets
    with different class counts, which is what lets fixed entropy
    thresholds transfer. 0*ln(0) is taken as 0.

    Raises InvalidDimension for fewer than 2 classes.
    """
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[-1]
    if n < 2:
        raise InvalidDimension(f"entropy needs at least 2 classes, got {n}")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p), 0.0)
    h = -terms.sum() / np.log(n)
    # Rounding can push the result a hair outside [0, 1].
    return float(min(max(h, 0.0), 1.0))


@dataclass
class ClassifierHead:
    """Frozen text-embedding classifier: N unit-norm rows of dimension D.

    `logit_scale` multiplies cosine similarities before softmax/entropy,
    matching the calibration of the pretrained model that produced the
    embeddings. It is applied inside `base_logits`, so every downstream
    entropy or probability sees scaled logits.
    """

    weights: np.ndarray  # (N, D), unit-norm rows
    logit_scale: float = 100.0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise InvalidDimension(f"head weights must be 2-D, got shape {w.shape}")
        if w.shape[0] < 2:
            raise InvalidDimension(f"head needs at least 2 classes, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise InvalidFeature("head weights contain non-finite entries")
        self.weights = w
        self.logit_scale = float(self.logit_scale)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def base_logits(f: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Scaled cosine logits `logit_scale * (W @ f)` as float64."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape[-1] != head.dim:
        raise DimensionMismatch(
            f"feature dim {f.shape[-1]} != head dim {head.dim}"
        )
    return head.logit_scale * (head.weights @ f)
