"""JSON reports with 17-significant-digit floats, and flat INI run configs."""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
import typing
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        text = f"{x:.17g}"
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number, bool)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def config_hash(config) -> str:
    canonical = json.dumps(dataclasses.asdict(config), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def envelope(command: str, config, checks: list[dict], body: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "ontolab",
        "version": __version__,
        "command": command,
        "seed": getattr(config, "seed", None),
        "config_hash": config_hash(config),
        "config": dataclasses.asdict(config),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        **body,
    }


class ConfigError(ValueError):
    pass


def _coerce(value: str, tp):
    origin = typing.get_origin(tp)
    if tp is bool:
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {value!r}")
    if origin in (tuple, list):
        (inner, *_) = typing.get_args(tp)
        return tuple(_coerce(v, inner) for v in value.replace(",", " ").split())
    if tp in (int, float, str):
        try:
            return tp(value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if typing.get_origin(tp) is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value.strip().lower() in ("", "none"):
            return None
        return _coerce(value, args[0])
    raise ConfigError(f"unsupported config type {tp}")


def load_config(cls, section: str, path: str | Path | None, overrides: dict):
    """Defaults < INI section < command-line overrides; unknown keys are errors."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for sec in parser.sections():
            if sec != section:
                raise ConfigError(f"unexpected section [{sec}] for command {section}")
        if parser.has_section(section):
            for key, raw in parser.items(section):
                if key not in names:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                values[key] = _coerce(raw, hints[key])
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in names:
            raise ConfigError(f"unknown parameter {key!r}")
        values[key] = val
    cfg = cls(**values)
    if hasattr(cfg, "validate"):
        cfg.validate()
    return cfg
