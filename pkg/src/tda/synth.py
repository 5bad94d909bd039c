"""Synthetic distribution-shift datasets for desk-scale experiments.

The generative model mimics the geometry of a vision-language embedding
space. Class prototypes (the text head) are correlated unit vectors,
`normalize(c0 + prototype_spread * g_c)` around a shared direction c0,
so inter-class cosine margins are small the way real text embeddings'
are. Image features are the class prototype rotated by exactly
`shift_angle` radians within a seeded random plane (the domain shift),
plus isotropic Gaussian noise, re-normalized. With zero angle and zero
noise every feature equals its class prototype and the zero-shot
classifier is perfect; the knobs then degrade it smoothly.

All randomness comes from numpy's Philox counter-based generator so a
(prototype_seed, stream_seed) pair pins the dataset bit-for-bit on a
given numpy version. Draw order: shared direction, prototype offsets,
per-class rotation directions from the prototype generator; class
counts, permutation, then noise from the stream generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import EmbeddingDataset
from .errors import InvalidConfig


@dataclass(frozen=True)
class SynthShiftSpec:
    dim: int = 64
    num_classes: int = 20
    samples_per_class: int = 200
    prototype_seed: int = 1
    stream_seed: int = 2
    shift_angle: float = 0.0   # radians, 0..pi/2
    noise_sigma: float = 0.0
    prototype_spread: float = 0.05  # offset scale around the shared direction
    class_prior: str = "uniform"    # "uniform" | "zipf"
    zipf_exponent: float = 1.1

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise InvalidConfig(f"dim must be >= 2, got {self.dim}")
        if self.num_classes < 2:
            raise InvalidConfig(f"num_classes must be >= 2, got {self.num_classes}")
        if self.samples_per_class < 1:
            raise InvalidConfig("samples_per_class must be >= 1")
        if not 0.0 <= self.shift_angle <= math.pi / 2:
            raise InvalidConfig(
                f"shift_angle must lie in [0, pi/2], got {self.shift_angle}"
            )
        if self.noise_sigma < 0.0:
            raise InvalidConfig(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.prototype_spread <= 0.0:
            raise InvalidConfig("prototype_spread must be positive")
        if self.class_prior not in ("uniform", "zipf"):
            raise InvalidConfig(
                f"class_prior must be 'uniform' or 'zipf', got {self.class_prior!r}"
            )
        if self.class_prior == "zipf" and self.zipf_exponent <= 0:
            raise InvalidConfig("zipf_exponent must be positive")


def pinned_benchmark() -> SynthShiftSpec:
    """The fixed shifted benchmark used by the regression suite.

    Regression constants in the tests (zero-shot accuracy, cache purity,
    method ordering) are frozen against exactly this spec.
    """
    return SynthShiftSpec(
        dim=64,
        num_classes=20,
        samples_per_class=200,
        prototype_seed=7,
        stream_seed=11,
        shift_angle=0.7,
        noise_sigma=0.12,
        prototype_spread=0.05,
    )


def _unit_rows(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def generate_synthetic(spec: SynthShiftSpec) -> EmbeddingDataset:
    """Deterministically build an EmbeddingDataset from `spec`."""
    n, d = spec.num_classes, spec.dim
    proto_rng = np.random.Generator(np.random.Philox(spec.prototype_seed))
    shared = proto_rng.standard_normal(d)
    shared /= np.linalg.norm(shared)
    offsets = proto_rng.standard_normal((n, d))
    prototypes = _unit_rows(shared[None, :] + spec.prototype_spread * offsets)

    # Per-class rotation target: a unit direction orthogonal to the
    # prototype; rotating by shift_angle inside that plane moves every
    # prototype by exactly the same angle.
    g = proto_rng.standard_normal((n, d))
    g -= np.einsum("ij,ij->i", g, prototypes)[:, None] * prototypes
    ortho = _unit_rows(g)
    shifted = math.cos(spec.shift_angle) * prototypes + math.sin(spec.shift_angle) * ortho

    stream_rng = np.random.Generator(np.random.Philox(spec.stream_seed))
    total = n * spec.samples_per_class
    if spec.class_prior == "uniform":
        counts = np.full(n, spec.samples_per_class, dtype=np.int64)
    else:
        weights = np.arange(1, n + 1, dtype=np.float64) ** (-spec.zipf_exponent)
        counts = stream_rng.multinomial(total, weights / weights.sum())
    labels = np.repeat(np.arange(n, dtype=np.int32), counts)
    labels = labels[stream_rng.permutation(total)]

    features = shifted[labels]
    if spec.noise_sigma > 0.0:
        features = features + spec.noise_sigma * stream_rng.standard_normal((total, d))
    features = _unit_rows(features)

    width = len(str(n - 1))
    names = [f"class_{i:0{width}d}" for i in range(n)]
    return EmbeddingDataset(
        class_names=names,
        head=prototypes.astype(np.float32),
        features=features.astype(np.float32),
        labels=labels,
    )
