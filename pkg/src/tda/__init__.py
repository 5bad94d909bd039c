"""Streaming test-time adaptation for frozen zero-shot classifiers.

The engine improves a frozen classifier's predictions over a feature
stream by maintaining two bounded, entropy-prioritized key-value caches
(one-hot pseudo labels and negative {-1,0} masks) and fusing their
retrievals with the base logits. No training, no gradients.
"""

from .adapter import (
    adaptation,
    cache_logits,
    cache_prediction,
    tda_predict,
    tip_adapter_predict,
    zero_shot_predict,
)
from .cache import (
    CacheEntry,
    CacheMatrices,
    DynamicCache,
    UpdateOutcome,
    UpdateStatus,
    as_matrices,
    cache_update,
    negative_gate,
    negative_mask,
    negative_update,
    positive_update,
)
from .config import AdapterParams, TdaConfig, UpdateOrder, load_config
from .dataset import EmbeddingDataset, read_dataset, write_dataset
from .errors import (
    CorruptDataset,
    DimensionMismatch,
    GridTooLarge,
    InvalidClass,
    InvalidConfig,
    InvalidDimension,
    InvalidFeature,
    NoDumpAvailable,
    TdaError,
    UnsupportedFormat,
)
from .numerics import ClassifierHead, base_logits, l2_normalize, normalized_entropy, softmax
from .stream import (
    ALL_METHODS,
    GridResult,
    GridSpec,
    Method,
    RunReport,
    compare,
    grid_search,
    run_stream,
    summarize_dump,
)
from .synth import SynthShiftSpec, generate_synthetic, pinned_benchmark

__version__ = "0.1.0"

__all__ = [
    "AdapterParams",
    "ALL_METHODS",
    "CacheEntry",
    "CacheMatrices",
    "ClassifierHead",
    "CorruptDataset",
    "DimensionMismatch",
    "DynamicCache",
    "EmbeddingDataset",
    "GridResult",
    "GridSpec",
    "GridTooLarge",
    "InvalidClass",
    "InvalidConfig",
    "InvalidDimension",
    "InvalidFeature",
    "Method",
    "NoDumpAvailable",
    "RunReport",
    "SynthShiftSpec",
    "TdaConfig",
    "TdaError",
    "UnsupportedFormat",
    "UpdateOrder",
    "UpdateOutcome",
    "UpdateStatus",
    "adaptation",
    "as_matrices",
    "base_logits",
    "cache_logits",
    "cache_prediction",
    "cache_update",
    "compare",
    "generate_synthetic",
    "grid_search",
    "l2_normalize",
    "load_config",
    "negative_gate",
    "negative_mask",
    "negative_update",
    "normalized_entropy",
    "pinned_benchmark",
    "positive_update",
    "read_dataset",
    "run_stream",
    "softmax",
    "summarize_dump",
    "tda_predict",
    "tip_adapter_predict",
    "write_dataset",
    "zero_shot_predict",
]
