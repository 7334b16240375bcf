"""JSON run configuration: parsing, validation, round-trip emission."""

from __future__ import annotations

import json
import os

from .errors import ConfigurationError
from .solver import SimConfig

#: JSON key -> (SimConfig attribute, type)
_KEYS = {
    "dim": ("dim", int),
    "n": ("n", int),
    "alpha": ("alpha", float),
    "eta": ("eta", float),
    "lambda": ("lam", float),
    "epsilon": ("epsilon", float),
    "delta": ("delta", float),
    "dt": ("dt", float),
    "t_end": ("t_end", float),
    "snapshot_stride": ("snapshot_stride", int),
    "initial_condition": ("initial_condition", str),
    "stress_init": ("stress_init", str),
    "seed": ("seed", int),
}

_REQUIRED = ("n", "alpha", "eta", "lambda", "dt", "t_end")

_DEFAULTS = {
    "dim": 2,
    "epsilon": 0.0,
    "delta": 1.0,
    "snapshot_stride": 1,
    "initial_condition": "taylor-green",
    "stress_init": "preset",
    "seed": 0,
}


def config_from_dict(doc: dict) -> SimConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a JSON object")
    unknown = sorted(set(doc) - set(_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ConfigurationError(f"missing required config keys: {', '.join(missing)}")
    kwargs = {}
    for key, (attr, cast) in _KEYS.items():
        if key in doc:
            value = doc[key]
        elif key in _DEFAULTS:
            value = _DEFAULTS[key]
        else:
            continue
        try:
            kwargs[attr] = cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(
                f"config key {key!r} has invalid value {value!r}: {exc}"
            ) from None
    try:
        return SimConfig(**kwargs)
    except ConfigurationError:
        raise
    except Exception as exc:  # dataclass-level type errors
        raise ConfigurationError(str(exc)) from None


def parse_config(path) -> SimConfig:
    """Load and validate a JSON config file."""
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(doc)


def config_to_dict(config: SimConfig) -> dict:
    """Effective configuration with every default filled in.

    Floats survive a JSON round-trip exactly (shortest-repr encoding),
    so parse(emit(cfg)) == cfg.
    """
    out = {}
    for key, (attr, cast) in _KEYS.items():
        value = getattr(config, attr)
        out[key] = cast(value)
    return out


def emit_config(config: SimConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(config_to_dict(config), handle, sort_keys=True, indent=2)
        handle.write("\n")
