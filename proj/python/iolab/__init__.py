"""Influence-operation simulation and detection lab."""

import json
import os

from ._core import (
    ConfigError,
    Error,
    InvalidArgument,
    __version__,
    adjusted_rand_index,
    canonical_config,
    communities,
    config_digest,
    lda,
    scenario_config,
    scenario_names,
    stack_clusters,
)
from . import _core

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "__version__",
    "adjusted_rand_index",
    "canonical_config",
    "communities",
    "config_digest",
    "lda",
    "load_config",
    "run",
    "scenario_config",
    "scenario_names",
    "stack_clusters",
]


def load_config(scenario=None, config=None, seed=None):
    """Config dict from a bundled scenario name or a JSON file, with an optional seed override."""
    if (scenario is None) == (config is None):
        raise ValueError("give exactly one of scenario or config")
    if scenario is not None:
        cfg = json.loads(scenario_config(scenario))
    else:
        with open(config, encoding="utf-8") as f:
            cfg = json.loads(canonical_config(f.read()))
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def run(scenario=None, config=None, seed=None, out=None):
    """Full pipeline; returns the parsed report. Artifacts land in out when given."""
    cfg = load_config(scenario, config, seed)
    out_dir = os.fspath(out) if out is not None else None
    return json.loads(_core.run(json.dumps(cfg), out_dir))
