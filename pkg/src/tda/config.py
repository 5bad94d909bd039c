"""Hyperparameter configuration: defaults, TOML files, env vars, CLI flags.

Precedence, lowest to highest: built-in defaults, config file, TDA_*
environment variables, explicit CLI flags. Unknown file keys are
rejected so typos fail loudly.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import InvalidConfig

ENV_PREFIX = "TDA_"


@dataclass(frozen=True)
class AdapterParams:
    """Retrieval weighting: affinity z maps to alpha * exp(-beta * (1 - z)).

    alpha is the residual ratio (how much cache evidence is worth against
    the base logits), beta the sharpness ratio (how fast weight decays as
    affinity falls off an exact match).
    """

    alpha: float = 2.0
    beta: float = 5.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidConfig(f"{name} must be positive and finite, got {v}")


class UpdateOrder(Enum):
    """Whether a sample may enter the caches before its own prediction."""

    UPDATE_THEN_PREDICT = "update-then-predict"
    PREDICT_THEN_UPDATE = "predict-then-update"


@dataclass(frozen=True)
class TdaConfig:
    """All engine hyperparameters with their searched defaults.

    pos_capacity / neg_capacity are the per-class shot capacities of the
    two caches; p_l the negative-mask probability threshold; (tau_l,
    tau_h) the entropy gate for negative-cache admission; logit_scale the
    multiplier applied to cosine similarities before softmax/entropy.
    """

    pos_capacity: int = 3
    neg_capacity: int = 2
    p_l: float = 0.03
    tau_l: float = 0.2
    tau_h: float = 0.5
    pos_params: AdapterParams = field(default_factory=AdapterParams)
    neg_params: AdapterParams = field(default_factory=AdapterParams)
    logit_scale: float = 100.0
    update_order: UpdateOrder = UpdateOrder.UPDATE_THEN_PREDICT

    def __post_init__(self) -> None:
        if self.pos_capacity < 1:
            raise InvalidConfig(f"pos_capacity must be >= 1, got {self.pos_capacity}")
        if self.neg_capacity < 1:
            raise InvalidConfig(f"neg_capacity must be >= 1, got {self.neg_capacity}")
        if not 0.0 < self.p_l < 1.0:
            raise InvalidConfig(f"p_l must lie in (0, 1), got {self.p_l}")
        if not 0.0 < self.tau_l < self.tau_h <= 1.0:
            raise InvalidConfig(
                f"tau thresholds must satisfy 0 < tau_l < tau_h <= 1, "
                f"got tau_l={self.tau_l}, tau_h={self.tau_h}"
            )
        if not (math.isfinite(self.logit_scale) and self.logit_scale > 0):
            raise InvalidConfig(f"logit_scale must be positive, got {self.logit_scale}")


# Flat key names as they appear in config files, env vars and CLI flags.
_SCALAR_KEYS = {
    "pos_capacity": int,
    "neg_capacity": int,
    "p_l": float,
    "tau_l": float,
    "tau_h": float,
    "pos_alpha": float,
    "pos_beta": float,
    "neg_alpha": float,
    "neg_beta": float,
    "logit_scale": float,
    "update_order": str,
}


def config_keys() -> tuple[str, ...]:
    return tuple(_SCALAR_KEYS)


def _build(values: Mapping[str, Any]) -> TdaConfig:
    try:
        order = UpdateOrder(values["update_order"])
    except ValueError:
        choices = ", ".join(o.value for o in UpdateOrder)
        raise InvalidConfig(
            f"update_order must be one of: {choices}, got {values['update_order']!r}"
        ) from None
    return TdaConfig(
        pos_capacity=values["pos_capacity"],
        neg_capacity=values["neg_capacity"],
        p_l=values["p_l"],
        tau_l=values["tau_l"],
        tau_h=values["tau_h"],
        pos_params=AdapterParams(values["pos_alpha"], values["pos_beta"]),
        neg_params=AdapterParams(values["neg_alpha"], values["neg_beta"]),
        logit_scale=values["logit_scale"],
        update_order=order,
    )


def config_to_flat(cfg: TdaConfig) -> dict[str, Any]:
    """Flatten a TdaConfig to the file/flag key space."""
    return {
        "pos_capacity": cfg.pos_capacity,
        "neg_capacity": cfg.neg_capacity,
        "p_l": cfg.p_l,
        "tau_l": cfg.tau_l,
        "tau_h": cfg.tau_h,
        "pos_alpha": cfg.pos_params.alpha,
        "pos_beta": cfg.pos_params.beta,
        "neg_alpha": cfg.neg_params.alpha,
        "neg_beta": cfg.neg_params.beta,
        "logit_scale": cfg.logit_scale,
        "update_order": cfg.update_order.value,
    }


def config_to_toml(cfg: TdaConfig) -> str:
    """Render a config in the same file syntax load_config accepts."""
    lines = []
    for key, value in config_to_flat(cfg).items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _coerce(key: str, raw: Any, source: str) -> Any:
    want = _SCALAR_KEYS[key]
    if want is str:
        if not isinstance(raw, str):
            raise InvalidConfig(f"{key} must be a string ({source})")
        return raw
    if isinstance(raw, bool):
        raise InvalidConfig(f"{key} must be a number, got a boolean ({source})")
    try:
        value = want(raw)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{key} must be {want.__name__}, got {raw!r} ({source})") from None
    if want is int and isinstance(raw, float) and raw != value:
        raise InvalidConfig(f"{key} must be an integer, got {raw!r} ({source})")
    return value


def load_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> TdaConfig:
    """Resolve a TdaConfig from defaults, file, environment, and overrides.

    `overrides` holds explicit CLI flag values (None entries ignored).
    `env` defaults to os.environ; variables look like TDA_P_L=0.05.
    """
    values: dict[str, Any] = dict(config_to_flat(TdaConfig()))

    if path is not None:
        try:
            with open(path, "rb") as fh:
                parsed = tomllib.load(fh)
        except FileNotFoundError:
            raise InvalidConfig(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise InvalidConfig(f"config file {path} is not valid TOML: {exc}") from None
        for key, raw in parsed.items():
            if key not in _SCALAR_KEYS:
                raise InvalidConfig(f"unknown config key {key!r} in {path}")
            values[key] = _coerce(key, raw, str(path))

    env = os.environ if env is None else env
    for key in _SCALAR_KEYS:
        var = ENV_PREFIX + key.upper()
        if var in env:
            values[key] = _coerce(key, env[var], f"env {var}")

    if overrides:
        for key, raw in overrides.items():
            if raw is None:
                continue
            if key not in _SCALAR_KEYS:
                raise InvalidConfig(f"unknown config key {key!r} in overrides")
            values[key] = _coerce(key, raw, "flag")

    return _build(values)
