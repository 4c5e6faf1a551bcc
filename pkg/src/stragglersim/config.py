"""Experiment configuration files (TOML or JSON) for the CLI.

Schema (all keys optional unless a command needs them):

    n = 16
    r = 4            # or r = [2, 4, 8] for sweeps
    k = 16           # or a list
    schemes = ["cs", "ss", "lb"]
    reps = 100000
    seed = 42

    [delay]
    preset = "scenario1"        # or "scenario2"

    # ... or explicit distributions, broadcast to all workers:
    # [delay.comp]
    # kind = "truncated_gaussian"   # mu, sigma, a, b
    # [delay.comm]
    # kind = "constant"             # value
    #
    # ... or per worker: delay.workers = [{comp = {...}, comm = {...}}, ...]
    # kind = "discrete" takes support = [...] and probs = [...]
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .delays import Constant, DelayModel, Discrete, TruncatedGaussian, scenario_preset

__all__ = ["ConfigError", "ExperimentConfig", "load_config_file", "build_delay_model"]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    n: int | None = None
    r_list: list[int] = field(default_factory=list)
    k_list: list[int] = field(default_factory=list)
    schemes: list[str] = field(default_factory=list)
    delay: dict = field(default_factory=dict)
    reps: int | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        def as_list(value):
            if value is None:
                return []
            if isinstance(value, (list, tuple)):
                return [int(v) for v in value]
            return [int(value)]

        known = {"n", "r", "k", "schemes", "delay", "reps", "seed"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        schemes = raw.get("schemes", [])
        if isinstance(schemes, str):
            schemes = [s.strip() for s in schemes.split(",") if s.strip()]
        return cls(
            n=int(raw["n"]) if "n" in raw else None,
            r_list=as_list(raw.get("r")),
            k_list=as_list(raw.get("k")),
            schemes=[str(s).lower() for s in schemes],
            delay=dict(raw.get("delay", {})),
            reps=int(raw["reps"]) if "reps" in raw else None,
            seed=int(raw["seed"]) if "seed" in raw else None,
        )


def load_config_file(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(path.read_text())
        else:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    return ExperimentConfig.from_dict(raw)


def _build_distribution(block: dict):
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError("distribution block needs a 'kind' key")
    kind = str(block["kind"]).lower()
    try:
        if kind in ("truncated_gaussian", "tg"):
            return TruncatedGaussian(
                mu=float(block["mu"]),
                sigma=float(block["sigma"]),
                a=float(block["a"]),
                b=float(block["b"]),
            )
        if kind == "discrete":
            values = [float(v) for v in block.get("support", block.get("values", ()))]
            probs = [float(p) for p in block["probs"]]
            if not values or len(values) != len(probs):
                raise ConfigError("discrete support and probs must match in length")
            return Discrete(support=tuple(zip(values, probs)))
        if kind == "constant":
            return Constant(value=float(block["value"]))
    except KeyError as exc:
        raise ConfigError(f"distribution block missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad distribution parameters: {exc}") from exc
    raise ConfigError(f"unknown distribution kind {kind!r}")


def build_delay_model(delay: dict, n: int, r: int, seed: int | None = None) -> DelayModel:
    """Instantiate the delay model from a config block.

    Presets take the worker count and load from the experiment; scenario2's
    mean permutations are drawn from `seed`. Explicit blocks either
    broadcast one comp/comm pair or list per-worker pairs.
    """
    if not delay:
        raise ConfigError("no delay model configured")
    if "preset" in delay:
        name = str(delay["preset"]).lower()
        rng = np.random.default_rng(seed if seed is not None else 0)
        try:
            return scenario_preset(name, n=n, r=r, rng=rng)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if "workers" in delay:
        workers = delay["workers"]
        if len(workers) != n:
            raise ConfigError(f"delay.workers lists {len(workers)} workers, expected {n}")
        comp = tuple(_build_distribution(w["comp"]) for w in workers)
        comm = tuple(_build_distribution(w["comm"]) for w in workers)
        return DelayModel(n=n, r=r, comp=comp, comm=comm)
    if "comp" in delay and "comm" in delay:
        return DelayModel.broadcast(
            n=n, r=r,
            comp=_build_distribution(delay["comp"]),
            comm=_build_distribution(delay["comm"]),
        )
    raise ConfigError("delay block needs 'preset', 'workers', or 'comp'+'comm'")
