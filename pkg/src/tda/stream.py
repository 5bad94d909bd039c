"""Streaming evaluation: per-sample loop, baselines, grid search, dumps.

A run processes the dataset's samples strictly in stored order with
batch size 1. Per sample it computes base logits, the prediction
entropy, performs cache updates and the adapted prediction in the
configured order, and scores top-1 against the label when one exists.
Timing covers the loop only, never dataset loading, so throughput
numbers are auditable against the reported sample count.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from time import perf_counter

import numpy as np

from .adapter import cache_logits, tip_adapter_predict
from .cache import DynamicCache, negative_update, positive_update
from .config import AdapterParams, TdaConfig, UpdateOrder, config_to_flat
from .dataset import EmbeddingDataset
from .errors import GridTooLarge, InvalidConfig

from enum import Enum


class Method(Enum):
    ZERO_SHOT = "zero-shot"
    TIP_ADAPTER = "tip-adapter"
    TDA_POSITIVE = "tda-positive"
    TDA_NEGATIVE = "tda-negative"
    TDA_FULL = "tda-full"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Method.ZERO_SHOT: "ZeroShot",
    Method.TIP_ADAPTER: "TipAdapter",
    Method.TDA_POSITIVE: "TdaPositiveOnly",
    Method.TDA_NEGATIVE: "TdaNegativeOnly",
    Method.TDA_FULL: "TdaFull",
}

ALL_METHODS = tuple(Method)


@dataclass
class RunReport:
    """Outcome of one streaming run.

    `top1_accuracy` is a percentage over the labeled subset;
    `labeled_samples` discloses how large that subset was.
    `per_class_accuracy` is NaN for classes with no labeled samples.
    """

    method: str
    top1_accuracy: float
    per_class_accuracy: np.ndarray
    samples_processed: int
    labeled_samples: int
    wall_time: float
    throughput: float
    cache_stats: dict[str, dict] = field(default_factory=dict)
    dump: dict | None = None


def _tip_support(ds: EmbeddingDataset, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Static labeled support: first k labeled samples per class, stream order."""
    counts = np.zeros(ds.num_classes, dtype=np.int64)
    rows = []
    for i in range(ds.num_samples):
        label = int(ds.labels[i])
        if label >= 0 and counts[label] < k:
            rows.append(i)
            counts[label] += 1
    keys = ds.features[rows] if rows else np.zeros((0, ds.dim), dtype=np.float32)
    onehots = np.zeros((len(rows), ds.num_classes), dtype=np.float32)
    for j, i in enumerate(rows):
        onehots[j, ds.labels[i]] = 1.0
    return keys, onehots


def _cache_stats(
    cache: DynamicCache, capacity: int, labels: np.ndarray
) -> dict:
    total = len(cache)
    stats: dict = {
        "entries": total,
        "fill_ratio": total / (cache.num_classes * capacity),
        "mean_entropy": float(cache.entropies.mean()) if total else None,
        "label_purity": None,
    }
    if total:
        true = labels[cache.arrivals]
        known = true >= 0
        if known.any():
            hit = (cache.value_cols == true[:, None]).any(axis=1)
            stats["label_purity"] = float(hit[known].mean())
    return stats


def _cache_dump(cache: DynamicCache, capacity: int, labels: np.ndarray) -> dict:
    classes = []
    for c in range(cache.num_classes):
        entries = cache.entries(c)
        if not entries:
            continue
        rows = []
        for e in entries:
            true = int(labels[e.arrival])
            rows.append(
                {
                    "entropy": e.entropy,
                    "arrival": e.arrival,
                    "true_label": true if true >= 0 else None,
                    "value_classes": [int(i) for i in np.flatnonzero(e.value)],
                }
            )
        classes.append({"class_id": c, "entries": rows})
    return {
        "shot_capacity": capacity,
        "num_classes": cache.num_classes,
        "num_entries": len(cache),
        "classes": classes,
    }


def run_stream(
    ds: EmbeddingDataset,
    cfg: TdaConfig,
    method: Method,
    keep_dump: bool = False,
) -> RunReport:
    """Stream the dataset through `method` and score it.

    Caches start empty and fill as the stream proceeds; accuracy is
    accounted over every labeled sample including the early phase where
    caches are still cold. The result is a pure function of (dataset
    bytes, config, method).
    """
    head = ds.classifier_head(cfg.logit_scale)
    n = ds.num_classes
    weights = head.weights
    scale = head.logit_scale
    feats = ds.features.astype(np.float64)
    labels = ds.labels

    pos = neg = None
    if method in (Method.TDA_POSITIVE, Method.TDA_FULL):
        pos = DynamicCache(n, ds.dim, cfg.pos_capacity)
    if method in (Method.TDA_NEGATIVE, Method.TDA_FULL):
        neg = DynamicCache(n, ds.dim, cfg.neg_capacity)
    if method is Method.TIP_ADAPTER:
        tip_keys, tip_labels = _tip_support(ds, cfg.pos_capacity)

    update_first = cfg.update_order is UpdateOrder.UPDATE_THEN_PREDICT
    correct = np.zeros(n, dtype=np.int64)
    totals = np.zeros(n, dtype=np.int64)

    # Base logits, probabilities and entropies depend only on the frozen
    # head, never on cache state, so they are computed in blocks with one
    # matmul each; samples are still consumed strictly one at a time.
    block = 2048
    t0 = perf_counter()
    for start in range(0, ds.num_samples, block):
        stop = min(start + block, ds.num_samples)
        base_blk = scale * (feats[start:stop] @ weights.T)
        shifted = base_blk - base_blk.max(axis=1, keepdims=True)
        p_blk = np.exp(shifted)
        p_blk /= p_blk.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p_blk > 0.0, p_blk * np.log(p_blk), 0.0)
        ent_blk = np.clip(-terms.sum(axis=1) / np.log(n), 0.0, 1.0)

        for i in range(start, stop):
            f = feats[i]
            base = base_blk[i - start]
            p = p_blk[i - start]
            ent = float(ent_blk[i - start])

            if update_first:
                if pos is not None:
                    positive_update(pos, f, p, ent, arrival=i)
                if neg is not None:
                    negative_update(neg, f, p, ent, cfg, arrival=i)

            if method is Method.TIP_ADAPTER:
                logits = tip_adapter_predict(f, head, tip_keys, tip_labels, cfg.pos_params)
            else:
                logits = base
                if pos is not None:
                    logits = logits + cache_logits(pos, f, cfg.pos_params, +1)
                if neg is not None:
                    logits = logits + cache_logits(neg, f, cfg.neg_params, -1)

            if not update_first:
                if pos is not None:
                    positive_update(pos, f, p, ent, arrival=i)
                if neg is not None:
                    negative_update(neg, f, p, ent, cfg, arrival=i)

            label = labels[i]
            if label >= 0:
                totals[label] += 1
                if int(np.argmax(logits)) == label:
                    correct[label] += 1
    wall = perf_counter() - t0

    labeled = int(totals.sum())
    top1 = 100.0 * correct.sum() / labeled if labeled else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(totals > 0, 100.0 * correct / totals, np.nan)

    cache_stats = {}
    dump_caches = {}
    if pos is not None:
        cache_stats["positive"] = _cache_stats(pos, cfg.pos_capacity, labels)
        if keep_dump:
            dump_caches["positive"] = _cache_dump(pos, cfg.pos_capacity, labels)
    if neg is not None:
        cache_stats["negative"] = _cache_stats(neg, cfg.neg_capacity, labels)
        if keep_dump:
            dump_caches["negative"] = _cache_dump(neg, cfg.neg_capacity, labels)

    dump = None
    if keep_dump:
        dump = {
            "method": method.label,
            "config": config_to_flat(cfg),
            "dataset": {
                "dim": ds.dim,
                "num_classes": n,
                "num_samples": ds.num_samples,
                "labeled_samples": labeled,
            },
            "caches": dump_caches,
        }

    return RunReport(
        method=method.label,
        top1_accuracy=float(top1),
        per_class_accuracy=per_class,
        samples_processed=ds.num_samples,
        labeled_samples=labeled,
        wall_time=wall,
        throughput=ds.num_samples / max(wall, 1e-9),
        cache_stats=cache_stats,
        dump=dump,
    )


def compare(ds: EmbeddingDataset, cfg: TdaConfig) -> list[RunReport]:
    """Run all five methods over the identical stream, fresh caches each."""
    return [run_stream(ds, cfg, m) for m in ALL_METHODS]


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter value lists for an exhaustive cross-product search.

    alpha/beta apply to both caches' adapter parameters. Combinations
    that violate config constraints (e.g. tau_l >= tau_h from crossed
    lists) are skipped and counted, not errors.
    """

    pos_capacity: tuple[int, ...] = (3,)
    neg_capacity: tuple[int, ...] = (2,)
    p_l: tuple[float, ...] = (0.03,)
    tau_l: tuple[float, ...] = (0.2,)
    tau_h: tuple[float, ...] = (0.5,)
    alpha: tuple[float, ...] = (2.0,)
    beta: tuple[float, ...] = (5.0,)
    method: Method = Method.TDA_FULL
    max_combos: int = 1024

    def __post_init__(self) -> None:
        for name in ("pos_capacity", "neg_capacity", "p_l", "tau_l", "tau_h", "alpha", "beta"):
            if not getattr(self, name):
                raise InvalidConfig(f"grid list {name} is empty")

    @property
    def size(self) -> int:
        out = 1
        for name in ("pos_capacity", "neg_capacity", "p_l", "tau_l", "tau_h", "alpha", "beta"):
            out *= len(getattr(self, name))
        return out


@dataclass
class GridRow:
    params: dict
    config: TdaConfig
    report: RunReport


@dataclass
class GridResult:
    rows: list[GridRow]          # sorted best-first
    best: TdaConfig | None
    skipped: int                 # invalid combinations dropped


def _grid_eval(task: tuple[EmbeddingDataset, TdaConfig, Method]) -> RunReport:
    ds, cfg, method = task
    return run_stream(ds, cfg, method)


def grid_search(
    spec: GridSpec,
    ds: EmbeddingDataset,
    base: TdaConfig | None = None,
    workers: int = 1,
) -> GridResult:
    """Evaluate every grid combination; rank by accuracy, ties by time.

    With workers > 1 configurations run in separate processes, each with
    private caches; results are merged in input order before ranking, so
    the outcome is identical to the sequential run.
    """
    if spec.size > spec.max_combos:
        raise GridTooLarge(
            f"grid has {spec.size} combinations, limit {spec.max_combos}"
        )
    base = base or TdaConfig()

    candidates = []
    skipped = 0
    for k, kn, pl, tl, th, a, b in itertools.product(
        spec.pos_capacity, spec.neg_capacity, spec.p_l,
        spec.tau_l, spec.tau_h, spec.alpha, spec.beta,
    ):
        params = {
            "pos_capacity": k, "neg_capacity": kn, "p_l": pl,
            "tau_l": tl, "tau_h": th, "alpha": a, "beta": b,
        }
        try:
            cfg = replace(
                base,
                pos_capacity=k, neg_capacity=kn, p_l=pl, tau_l=tl, tau_h=th,
                pos_params=AdapterParams(a, b), neg_params=AdapterParams(a, b),
            )
        except InvalidConfig:
            skipped += 1
            continue
        candidates.append((params, cfg))

    if workers > 1 and len(candidates) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_grid_eval, [(ds, c, spec.method) for _, c in candidates]))
    else:
        reports = [run_stream(ds, cfg, spec.method) for _, cfg in candidates]

    rows = [GridRow(params, cfg, rep) for (params, cfg), rep in zip(candidates, reports)]
    rows.sort(key=lambda r: (-r.report.top1_accuracy, r.report.wall_time))
    return GridResult(rows=rows, best=rows[0].config if rows else None, skipped=skipped)


def summarize_dump(dump: dict) -> dict:
    """Per-class and overall statistics from a cache dump.

    Purity counts an entry as correct when the ground-truth label of the
    sample it came from appears among the entry's value classes: the
    pseudo-label class for positive entries, the masked (likely) classes
    for negative entries.
    """
    out: dict = {"method": dump.get("method"), "caches": {}}
    for name, cache in dump.get("caches", {}).items():
        rows = []
        all_ents: list[float] = []
        hits = 0
        labeled = 0
        for cls in cache["classes"]:
            ents = np.array([e["entropy"] for e in cls["entries"]], dtype=np.float64)
            all_ents.extend(ents.tolist())
            cls_hits = cls_labeled = 0
            for e in cls["entries"]:
                if e["true_label"] is None:
                    continue
                cls_labeled += 1
                if e["true_label"] in e["value_classes"]:
                    cls_hits += 1
            hits += cls_hits
            labeled += cls_labeled
            q = np.quantile(ents, [0.0, 0.25, 0.5, 0.75, 1.0])
            rows.append(
                {
                    "class_id": cls["class_id"],
                    "count": len(cls["entries"]),
                    "entropy_min": float(q[0]),
                    "entropy_q25": float(q[1]),
                    "entropy_median": float(q[2]),
                    "entropy_q75": float(q[3]),
                    "entropy_max": float(q[4]),
                    "purity": (cls_hits / cls_labeled) if cls_labeled else None,
                }
            )
        total = cache["num_entries"]
        capacity = cache["shot_capacity"] * cache["num_classes"]
        out["caches"][name] = {
            "rows": rows,
            "overall": {
                "entries": total,
                "fill_ratio": total / capacity if capacity else 0.0,
                "mean_entropy": float(np.mean(all_ents)) if all_ents else None,
                "purity": (hits / labeled) if labeled else None,
            },
        }
    return out
