"""Prediction fusion: base classifier plus positive/negative cache terms.

The retrieval weight for a cached key with cosine affinity z to the
query is alpha * exp(-beta * (1 - z)); cache logits are those weights
pushed through the stored label vectors. The fused prediction is simply
base + positive term + negative term, so empty caches degrade exactly
to the zero-shot classifier.
"""
from __future__ import annotations

import numpy as np

from .cache import CacheMatrices, DynamicCache
from .config import AdapterParams, TdaConfig
from .errors import DimensionMismatch
from .numerics import ClassifierHead, base_logits


def adaptation(z: np.ndarray | float, params: AdapterParams) -> np.ndarray | float:
    """Elementwise alpha * exp(-beta * (1 - z)); strictly increasing in z."""
    if np.isscalar(z):
        return params.alpha * float(np.exp(-params.beta * (1.0 - z)))
    z = np.asarray(z, dtype=np.float64)
    return params.alpha * np.exp(-params.beta * (1.0 - z))


def cache_prediction(
    f: np.ndarray,
    m: CacheMatrices,
    params: AdapterParams,
    sign: int,
) -> np.ndarray:
    """Cache logits `sign * A(f @ keys^T) @ values` from a dense snapshot.

    sign is +1 for the positive cache, -1 for the negative cache (whose
    {-1, 0} values then contribute non-negative logits to the classes
    they mark). An empty snapshot yields a zero vector.
    """
    if m.size == 0:
        return np.zeros(m.values.shape[1], dtype=np.float64)
    if m.keys.shape[1] != np.shape(f)[-1]:
        raise DimensionMismatch(
            f"query dim {np.shape(f)[-1]} != cache key dim {m.keys.shape[1]}"
        )
    affinity = m.keys @ np.asarray(f, dtype=np.float64)
    weights = adaptation(affinity, params)
    return float(sign) * (weights @ np.asarray(m.values, dtype=np.float64))


def cache_logits(
    cache: DynamicCache,
    f: np.ndarray,
    params: AdapterParams,
    sign: int,
) -> np.ndarray:
    """Same quantity as `cache_prediction`, computed from live cache storage.

    Avoids densifying the label vectors: weights are scattered through
    the sparse (column, value) pairs, which is what keeps per-sample cost
    linear in cache size rather than cache size times class count.
    """
    n = cache.num_classes
    if len(cache) == 0:
        return np.zeros(n, dtype=np.float64)
    affinity = cache.key_rows @ np.asarray(f, dtype=np.float64)
    weights = adaptation(affinity, params)
    # Padding columns are -1 with value 0; shifting all columns up by one
    # routes them to a throwaway bin 0 where the zero values contribute
    # nothing, avoiding any boolean masking on the hot path.
    contrib = weights[:, None] * cache.value_vals
    out = np.bincount(
        (cache.value_cols + 1).ravel(), weights=contrib.ravel(), minlength=n + 1
    )[1:]
    return float(sign) * out


def zero_shot_predict(f: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Base classifier alone: scaled cosine logits against the text head."""
    return base_logits(f, head)


def tda_predict(
    f: np.ndarray,
    head: ClassifierHead,
    pos: DynamicCache | None,
    neg: DynamicCache | None,
    cfg: TdaConfig,
) -> np.ndarray:
    """Fused logits: base plus positive-cache plus negative-cache terms.

    Either cache may be None (or empty), dropping its term; with both
    absent this is exactly the zero-shot prediction.
    """
    logits = base_logits(f, head)
    if pos is not None:
        logits = logits + cache_logits(pos, f, cfg.pos_params, +1)
    if neg is not None:
        logits = logits + cache_logits(neg, f, cfg.neg_params, -1)
    return logits


def tip_adapter_predict(
    f: np.ndarray,
    head: ClassifierHead,
    train_keys: np.ndarray,
    train_labels: np.ndarray,
    params: AdapterParams,
) -> np.ndarray:
    """Static-cache baseline: base logits plus A(f @ keys^T) @ labels.

    `train_keys` / `train_labels` come from a labeled support set and are
    never updated. An empty support set reduces to the base classifier.
    """
    logits = base_logits(f, head)
    train_keys = np.asarray(train_keys, dtype=np.float64)
    if train_keys.shape[0] == 0:
        return logits
    if train_keys.shape[1] != np.shape(f)[-1]:
        raise DimensionMismatch(
            f"query dim {np.shape(f)[-1]} != support key dim {train_keys.shape[1]}"
        )
    affinity = train_keys @ np.asarray(f, dtype=np.float64)
    weights = adaptation(affinity, params)
    return logits + weights @ np.asarray(train_labels, dtype=np.float64)
