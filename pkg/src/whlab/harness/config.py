"""TOML experiment configs: loading, validation against the registry schema, hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .registry import REGISTRY, PROTOCOL_FIELDS

MAX_SEED = (1 << 64) - 1


class ConfigError(ValueError):
    """A schema violation; ``path`` is the dotted location of the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ExperimentConfig:
    experiment: str
    protocol: dict[str, Any]
    ensemble: dict[str, int]
    grid: dict[str, list[float]]
    options: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = {"experiment": self.experiment, "protocol": dict(self.protocol),
             "ensemble": dict(self.ensemble), "grid": {k: list(v) for k, v in self.grid.items()},
             "options": dict(self.options)}
        if d["protocol"].get("schedule") is None:
            d["protocol"].pop("schedule", None)
        else:
            d["protocol"]["schedule"] = [list(s) for s in d["protocol"]["schedule"]]
        return d

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def hash(self) -> str:
        """Short sha256 of the canonical resolved config (seed included)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# field coercion ---------------------------------------------------------------

def _int(path, v, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ConfigError(path, f"value {v} out of range [{lo}, {hi}]")
    return v


def _float(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if not np.isfinite(v):
        raise ConfigError(path, "must be finite")
    return float(v)


def _choice(path, v, options):
    if v not in options:
        raise ConfigError(path, f"expected one of {list(options)}, got {v!r}")
    return v


def _schedule(path, v):
    if not isinstance(v, list) or not v:
        raise ConfigError(path, "expected a non-empty list of [time, mu] pairs")
    out = []
    for k, item in enumerate(v):
        if not isinstance(item, list) or len(item) != 2:
            raise ConfigError(f"{path}[{k}]", "expected a [time, mu] pair")
        out.append((_float(f"{path}[{k}]", item[0]), _float(f"{path}[{k}]", item[1])))
    return tuple(out)


def _protocol_field(name, v):
    path = f"protocol.{name}"
    kind = PROTOCOL_FIELDS[name]
    if kind == "int":
        return _int(path, v, lo=1)
    if kind == "float":
        return _float(path, v)
    if kind == "schedule":
        return _schedule(path, v)
    return _choice(path, v, kind)


def expand_grid(path: str, spec) -> list[float]:
    """A grid is an explicit list, ``{start, stop, step}`` (stop inclusive) or ``{start, stop, num}``."""
    if isinstance(spec, list):
        g = [_float(f"{path}[{k}]", x) for k, x in enumerate(spec)]
    elif isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "step", "num"}
        if extra:
            raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown grid key")
        for key in ("start", "stop"):
            if key not in spec:
                raise ConfigError(f"{path}.{key}", "required grid key missing")
        a, b = _float(f"{path}.start", spec["start"]), _float(f"{path}.stop", spec["stop"])
        if ("step" in spec) == ("num" in spec):
            raise ConfigError(path, "give exactly one of 'step' or 'num'")
        if "num" in spec:
            n = _int(f"{path}.num", spec["num"], lo=1)
            g = np.linspace(a, b, n).tolist()
        else:
            h = _float(f"{path}.step", spec["step"])
            if h <= 0:
                raise ConfigError(f"{path}.step", "must be positive")
            n = int(np.floor((b - a) / h + 1e-9)) + 1
            g = np.round(a + h * np.arange(n), 12).tolist()
    else:
        raise ConfigError(path, f"expected a list or a table, got {type(spec).__name__}")
    if not g:
        raise ConfigError(path, "grid is empty")
    if np.any(np.diff(g) <= 0):
        raise ConfigError(path, "grid must be strictly increasing")
    return [float(x) for x in g]


# loading ----------------------------------------------------------------------

def load_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("<file>", f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"invalid TOML: {exc}") from exc


def resolve(experiment: str, raw: dict, seed: int | None = None) -> ExperimentConfig:
    """Merge ``raw`` over the registry defaults and validate every field.

    ``protocol.N`` must be given explicitly; all other fields fall back to the
    registry's documented desk-scale defaults.
    """
    if experiment not in REGISTRY:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    entry = REGISTRY[experiment]
    if "experiment" in raw and raw["experiment"] != experiment:
        raise ConfigError("experiment", f"file is for {raw['experiment']!r}, not {experiment!r}")
    unknown = set(raw) - {"experiment", "protocol", "ensemble", "grid", "options"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    for section in ("protocol", "ensemble", "grid", "options"):
        if section in raw and not isinstance(raw[section], dict):
            raise ConfigError(section, "expected a table")

    rp = raw.get("protocol", {})
    if "N" not in rp:
        raise ConfigError("protocol.N", "required field missing")
    protocol = dict(entry.defaults["protocol"])
    for k, v in rp.items():
        if k not in PROTOCOL_FIELDS:
            raise ConfigError(f"protocol.{k}", "unknown field")
        protocol[k] = _protocol_field(k, v)
    N = protocol["N"]
    if N % 2:
        raise ConfigError("protocol.N", f"must be even, got {N}")
    if protocol["q"] % 2 or protocol["q"] > N:
        raise ConfigError("protocol.q", f"must be even and at most N={N}")
    if protocol["beta"] < 0:
        raise ConfigError("protocol.beta", "must be non-negative")

    ens = dict(entry.defaults["ensemble"])
    for k, v in raw.get("ensemble", {}).items():
        if k not in ens:
            raise ConfigError(f"ensemble.{k}", "unknown field")
        ens[k] = _int(f"ensemble.{k}", v, lo=0 if k == "master_seed" else 1, hi=MAX_SEED)
    if seed is not None:
        ens["master_seed"] = _int("--seed", seed, lo=0, hi=MAX_SEED)

    grid = {k: expand_grid(f"grid.{k}", v) for k, v in entry.defaults["grid"].items()}
    for k, v in raw.get("grid", {}).items():
        if k not in entry.defaults["grid"]:
            raise ConfigError(f"grid.{k}", f"unknown grid for {experiment}")
        grid[k] = expand_grid(f"grid.{k}", v)

    options = dict(entry.defaults.get("options", {}))
    for k, v in raw.get("options", {}).items():
        if k not in options:
            raise ConfigError(f"options.{k}", f"unknown option for {experiment}")
        d = options[k]
        if isinstance(d, bool):
            if not isinstance(v, bool):
                raise ConfigError(f"options.{k}", "expected a boolean")
        elif isinstance(d, int):
            v = _int(f"options.{k}", v, lo=0)
        elif isinstance(d, float):
            v = _float(f"options.{k}", v)
        elif isinstance(d, list):
            if not isinstance(v, list):
                raise ConfigError(f"options.{k}", "expected a list")
            v = [_int(f"options.{k}[{i}]", x, lo=0) if isinstance(x, int) and not isinstance(x, bool)
                 else _float(f"options.{k}[{i}]", x) for i, x in enumerate(v)]
        elif isinstance(d, str) and not isinstance(v, str):
            raise ConfigError(f"options.{k}", "expected a string")
        options[k] = v
    return ExperimentConfig(experiment, protocol, ens, grid, options)


def load_config(experiment: str, path: str | Path, seed: int | None = None) -> ExperimentConfig:
    return resolve(experiment, load_toml(path), seed)


def default_toml(experiment: str) -> str:
    """The registry defaults as an editable TOML file."""
    if experiment not in REGISTRY:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    d = REGISTRY[experiment].defaults
    doc = {"experiment": experiment, "protocol": dict(d["protocol"]),
           "ensemble": dict(d["ensemble"]), "grid": dict(d["grid"]),
           "options": dict(d.get("options", {}))}
    if doc["protocol"].get("schedule") is None:
        doc["protocol"].pop("schedule", None)
    else:
        doc["protocol"]["schedule"] = [list(s) for s in doc["protocol"]["schedule"]]
    if not doc["options"]:
        doc.pop("options")
    return tomli_w.dumps(doc)
