"""Experiment configuration: JSON documents merged over registry defaults.

Schema (all sections optional except ``experiment``)::

    {
      "experiment": "q_decay",
      "hamiltonian": {"key": "power", "q": 2.0},
      "dissipation": {"key": "zero"},
      "grid": {"dim": 1, "n": 256},
      "path": {"T": 256.0, "dt": 0.0625, "seeds": "0..29"},
      "initial_condition": {"preset": "cos", "amplitude": 1.0},
      "tolerances": {"exponent_rel": 0.15},
      "params": {"amplitude_factor": 2.0},
      "output_dir": "out"
    }

Unknown fields are rejected.  ``seeds`` is a list of integers, a single
integer, or an inclusive range string ``"a..b"``.  Tolerance and
parameter names must be among the experiment's declared defaults.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..hamiltonians import DISSIPATION_KEYS, HAMILTONIAN_KEYS

__all__ = ["ExperimentConfig", "ConfigError", "parse_seeds", "load_config", "resolve_config",
           "INITIAL_PRESETS"]

TOP_LEVEL = ("experiment", "hamiltonian", "dissipation", "grid", "path", "initial_condition",
             "tolerances", "params", "output_dir")
HAMILTONIAN_FIELDS = ("key", "q", "coeff", "amp", "coeff_offset", "raw", "axis", "p_max")
DISSIPATION_FIELDS = ("key", "delta", "alpha", "m", "a", "w")
GRID_FIELDS = ("dim", "n")
PATH_FIELDS = ("T", "dt", "seeds")
INITIAL_FIELDS = ("preset", "amplitude")
INITIAL_PRESETS = ("cos", "sin", "mix", "skewed", "plateau", "two_mode")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_seeds(spec) -> tuple[int, ...]:
    """Seeds from a list, an integer, or an inclusive range ``"a..b"``."""
    if isinstance(spec, bool):
        raise ConfigError("seeds must be integers")
    if isinstance(spec, int):
        seeds = (spec,)
    elif isinstance(spec, str):
        if ".." in spec:
            a, b = spec.split("..", 1)
            try:
                lo, hi = int(a), int(b)
            except ValueError as exc:
                raise ConfigError(f"bad seed range {spec!r}") from exc
            seeds = tuple(range(lo, hi + 1))
        else:
            try:
                seeds = (int(spec),)
            except ValueError as exc:
                raise ConfigError(f"bad seed spec {spec!r}") from exc
    else:
        try:
            seeds = tuple(int(s) for s in spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad seed list {spec!r}") from exc
    if not seeds:
        raise ConfigError("seed set is empty")
    if any(s < 0 for s in seeds):
        raise ConfigError("seeds must be non-negative")
    return tuple(sorted(set(seeds)))


def _check_fields(section: str, value, allowed) -> dict:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{section} must be an object")
    unknown = sorted(set(value) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown field(s) in {section}: {', '.join(unknown)}")
    return dict(value)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment configuration."""

    experiment: str
    hamiltonian: dict = field(default_factory=dict)
    dissipation: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    path: dict = field(default_factory=dict)
    initial_condition: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output_dir: str | None = None

    @property
    def seeds(self) -> tuple[int, ...]:
        return parse_seeds(self.path.get("seeds", 0))

    @property
    def n(self) -> int:
        return int(self.grid.get("n", 128))

    @property
    def T(self) -> float:
        return float(self.path["T"])

    @property
    def dt(self) -> float:
        return float(self.path["dt"])

    def to_dict(self) -> dict:
        d = {k: copy.deepcopy(getattr(self, k)) for k in TOP_LEVEL}
        d["path"]["seeds"] = list(self.seeds)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def with_overrides(self, *, seeds=None, n: int | None = None, output_dir: str | None = None,
                       params: Mapping | None = None, tolerances: Mapping | None = None,
                       path: Mapping | None = None) -> "ExperimentConfig":
        raw = self.to_dict()
        if seeds is not None:
            raw["path"]["seeds"] = list(parse_seeds(seeds))
        if n is not None:
            raw["grid"]["n"] = int(n)
        if output_dir is not None:
            raw["output_dir"] = str(output_dir)
        for name, upd in (("params", params), ("tolerances", tolerances), ("path", path)):
            if upd:
                raw[name].update(upd)
        return resolve_config(raw)


def _merge(defaults: dict, given: Mapping | None, section: str, allowed) -> dict:
    if given is None:
        return copy.deepcopy(defaults)
    given = _check_fields(section, given, allowed)
    if "key" in given and given["key"] != defaults.get("key"):
        return given
    out = copy.deepcopy(defaults)
    out.update(given)
    return out


def resolve_config(raw: Mapping) -> ExperimentConfig:
    """Validate ``raw`` and merge it over the registry defaults of its experiment."""
    from .registry import REGISTRY

    if not isinstance(raw, Mapping):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(raw) - set(TOP_LEVEL))
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    key = raw.get("experiment")
    if key not in REGISTRY:
        raise ConfigError(f"unknown experiment {key!r}")
    d = REGISTRY[key].defaults
    ham = _merge(d.get("hamiltonian", {}), raw.get("hamiltonian"), "hamiltonian", HAMILTONIAN_FIELDS)
    dis = _merge(d.get("dissipation", {}), raw.get("dissipation"), "dissipation", DISSIPATION_FIELDS)
    grid = _merge(d.get("grid", {}), raw.get("grid"), "grid", GRID_FIELDS)
    path = _merge(d.get("path", {}), raw.get("path"), "path", PATH_FIELDS)
    init = _merge(d.get("initial_condition", {}), raw.get("initial_condition"), "initial_condition",
                  INITIAL_FIELDS)
    tol = _merge(d.get("tolerances", {}), raw.get("tolerances"), "tolerances", d.get("tolerances", {}))
    params = _merge(d.get("params", {}), raw.get("params"), "params", d.get("params", {}))

    if ham and ham.get("key") not in HAMILTONIAN_KEYS:
        raise ConfigError(f"unknown Hamiltonian key {ham.get('key')!r}")
    if dis and dis.get("key") not in DISSIPATION_KEYS:
        raise ConfigError(f"unknown dissipation key {dis.get('key')!r}")
    n = grid.get("n", 128)
    if not isinstance(n, int) or not _is_power_of_two(n):
        raise ConfigError(f"grid size n must be a power of two, got {n!r}")
    if grid.get("dim", 1) not in (1, 2):
        raise ConfigError("grid dim must be 1 or 2")
    for name in ("T", "dt"):
        if name in path and not float(path[name]) > 0:
            raise ConfigError(f"path {name} must be positive")
    path["seeds"] = list(parse_seeds(path.get("seeds", 0)))
    if init and init.get("preset") not in INITIAL_PRESETS:
        raise ConfigError(f"unknown initial condition preset {init.get('preset')!r}")
    out = raw.get("output_dir")
    cfg = ExperimentConfig(key, ham, dis, grid, path, init, tol, params,
                           None if out is None else str(out))
    REGISTRY[key].validate(cfg)
    return cfg


def load_config(source: str | Path | Mapping) -> ExperimentConfig:
    """Resolve a config from a JSON file, a mapping, or a bare experiment key."""
    from .registry import REGISTRY

    if isinstance(source, Mapping):
        return resolve_config(source)
    text = str(source)
    if text in REGISTRY:
        return resolve_config({"experiment": text})
    p = Path(text)
    if not p.exists():
        raise ConfigError(f"no config file or experiment named {text!r}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    return resolve_config(raw)
