"""Experiment configuration (YAML, strict schema).

::

    model: step_z.model            # relative to the config file
    kappa: [[3, 0], [4, 1], [5, 0]]
    quasi_orbit: ["+inf"]
    eps: [0.2, 0.1, 0.05]
    truncation: [2000]             # strictly increasing
    time: {start: 0, stop: 100, step: 0.5}
    probes: {count: 20, seed: 0}
    output: out/step_z             # relative to the working directory
    allowance: false               # re-measure each (E, K) at 2L
    grid: 4096                     # symbol sampling per torus dimension

Only ``model``, ``kappa``, ``quasi_orbit`` and ``eps`` are required.  Unknown
keys are rejected with the dotted path of the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .spectral import DEFAULT_GRID, BumpFunction

_TOP = {"model", "kappa", "quasi_orbit", "eps", "truncation", "time", "probes", "output", "allowance", "grid"}
_TIME = {"start", "stop", "step"}
_PROBES = {"count", "seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    model: Path
    kappa: BumpFunction
    quasi_orbit: tuple[str, ...]
    eps: tuple[float, ...]
    truncation: tuple[int, ...] = ()
    t_start: float = 0.0
    t_stop: float = 100.0
    t_step: float = 0.5
    probe_count: int = 20
    seed: int = 0
    output: Path = Path("out")
    allowance: bool = False
    grid: int = DEFAULT_GRID
    source: Path | None = field(default=None, compare=False)

    @property
    def t_grid(self) -> np.ndarray:
        n = int(round((self.t_stop - self.t_start) / self.t_step))
        return self.t_start + self.t_step * np.arange(n + 1)


def _num(value, path: str, kind=float, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}", field=path)
    if kind is int and not float(value).is_integer():
        raise ConfigError(f"{path}: expected an integer, got {value!r}", field=path)
    v = kind(value)
    if positive and not v > 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}", field=path)
    if nonneg and v < 0:
        raise ConfigError(f"{path}: must be nonnegative, got {value!r}", field=path)
    return v


def _list(value, path: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a nonempty list", field=path)
    return value


def _section(raw, path: str, allowed: set) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping", field=path)
    for k in raw:
        if k not in allowed:
            raise ConfigError(f"unknown field {path}.{k}", field=f"{path}.{k}")
    return raw


def parse_config(raw: dict, base: Path | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("the configuration must be a mapping", field="")
    for k in raw:
        if k not in _TOP:
            raise ConfigError(f"unknown field {k}", field=str(k))
    for k in ("model", "kappa", "quasi_orbit", "eps"):
        if k not in raw:
            raise ConfigError(f"missing required field {k}", field=k)
    base = base or Path(".")
    if not isinstance(raw["model"], str):
        raise ConfigError("model: expected a path", field="model")
    model = Path(raw["model"])
    model = model if model.is_absolute() else base / model

    nodes = []
    for i, node in enumerate(_list(raw["kappa"], "kappa")):
        if not isinstance(node, list) or len(node) != 2:
            raise ConfigError(f"kappa[{i}]: expected [x, y]", field=f"kappa[{i}]")
        nodes.append((_num(node[0], f"kappa[{i}][0]"), _num(node[1], f"kappa[{i}][1]")))
    try:
        kappa = BumpFunction(tuple(nodes))
    except ValueError as exc:
        raise ConfigError(f"kappa: {exc}", field="kappa") from None

    Q = _list(raw["quasi_orbit"], "quasi_orbit")
    if not all(isinstance(n, str) for n in Q):
        raise ConfigError("quasi_orbit: expected boundary point names", field="quasi_orbit")
    eps = tuple(_num(e, f"eps[{i}]", positive=True) for i, e in enumerate(_list(raw["eps"], "eps")))

    kw = {}
    if "truncation" in raw:
        Ls = tuple(
            _num(v, f"truncation[{i}]", int, positive=True)
            for i, v in enumerate(_list(raw["truncation"], "truncation"))
        )
        if any(b <= a for a, b in zip(Ls, Ls[1:])):
            raise ConfigError("truncation: values must be strictly increasing", field="truncation")
        kw["truncation"] = Ls
    if "time" in raw:
        t = _section(raw["time"], "time", _TIME)
        for k in _TIME & set(t):
            kw[f"t_{k}"] = _num(t[k], f"time.{k}", positive=(k == "step"), nonneg=(k != "step"))
        if kw.get("t_stop", 100.0) < kw.get("t_start", 0.0):
            raise ConfigError("time.stop: must not precede time.start", field="time.stop")
    if "probes" in raw:
        p = _section(raw["probes"], "probes", _PROBES)
        if "count" in p:
            kw["probe_count"] = _num(p["count"], "probes.count", int, positive=True)
        if "seed" in p:
            kw["seed"] = _num(p["seed"], "probes.seed", int, nonneg=True)
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ConfigError("output: expected a path", field="output")
        kw["output"] = Path(raw["output"])
    if "allowance" in raw:
        if not isinstance(raw["allowance"], bool):
            raise ConfigError("allowance: expected true or false", field="allowance")
        kw["allowance"] = raw["allowance"]
    if "grid" in raw:
        kw["grid"] = _num(raw["grid"], "grid", int, positive=True)
    return ExperimentConfig(model, kappa, tuple(Q), eps, **kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", field="") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})", field="") from None
    cfg = parse_config(raw, path.parent)
    return replace(cfg, source=path)
