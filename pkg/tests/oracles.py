"""Independent reference implementations used to check the engine.

Everything here is written as plain scalar loops over Python floats
(which are IEEE double), deliberately avoiding the vectorized code paths
under test. Slow and obviously correct is the point.
"""
from __future__ import annotations

import math

import numpy as np


def naive_softmax(logits) -> list[float]:
    m = max(float(x) for x in logits)
    exps = [math.exp(float(x) - m) for x in logits]
    s = sum(exps)
    return [e / s for e in exps]


def naive_entropy(p) -> float:
    h = 0.0
    for q in p:
        q = float(q)
        if q > 0.0:
            h -= q * math.log(q)
    return h / math.log(len(p))


def naive_base_logits(f, weights, scale: float) -> list[float]:
    out = []
    for row in weights:
        acc = 0.0
        for a, b in zip(row, f):
            acc += float(a) * float(b)
        out.append(scale * acc)
    return out


def naive_adaptation(z: float, alpha: float, beta: float) -> float:
    return alpha * math.exp(-beta * (1.0 - z))


def naive_cache_prediction(f, keys, values, alpha, beta, sign) -> list[float]:
    n = int(np.shape(values)[1]) if np.ndim(values) == 2 else (len(values[0]) if len(values) else 0)
    out = [0.0] * n
    for key, value in zip(keys, values):
        z = 0.0
        for a, b in zip(key, f):
            z += float(a) * float(b)
        w = naive_adaptation(z, alpha, beta)
        for c in range(n):
            out[c] += sign * w * float(value[c])
    return out


def naive_tda_predict(f, weights, scale, pos_kv, neg_kv, pos_ab, neg_ab) -> list[float]:
    """Three-term fusion; pos_kv/neg_kv are (keys, values) pairs."""
    base = naive_base_logits(f, weights, scale)
    n = len(base)
    pos = naive_cache_prediction(f, pos_kv[0], pos_kv[1], *pos_ab, +1) if len(pos_kv[0]) else [0.0] * n
    neg = naive_cache_prediction(f, neg_kv[0], neg_kv[1], *neg_ab, -1) if len(neg_kv[0]) else [0.0] * n
    return [b + p + q for b, p, q in zip(base, pos, neg)]


def offline_select(entropies, arrivals, k: int) -> list[int]:
    """Arrival ids of the k lowest-entropy samples, earliest arrival on ties."""
    order = sorted(range(len(entropies)), key=lambda i: (entropies[i], arrivals[i]))
    return sorted(arrivals[i] for i in order[:k])


def offline_positive_cache(probabilities, entropies, k: int) -> dict[int, list[int]]:
    """Expected positive-cache contents after streaming all samples.

    Routes each sample to argmax of its probability vector, then keeps
    the per-class k-lowest-entropy selection with earliest-arrival ties.
    Returns {class_id: sorted arrival ids}.
    """
    routed: dict[int, list[int]] = {}
    for i, p in enumerate(probabilities):
        c = int(np.argmax(p))
        routed.setdefault(c, []).append(i)
    out = {}
    for c, ids in routed.items():
        ents = [entropies[i] for i in ids]
        out[c] = offline_select(ents, ids, k)
    return out


def offline_zero_shot_accuracy(features, weights, labels) -> float:
    """Top-1 percent via one whole-dataset matmul, labeled samples only."""
    logits = np.asarray(features, dtype=np.float64) @ np.asarray(weights, dtype=np.float64).T
    preds = np.argmax(logits, axis=1)
    labels = np.asarray(labels)
    mask = labels >= 0
    if not mask.any():
        return 0.0
    return 100.0 * float(np.mean(preds[mask] == labels[mask]))
