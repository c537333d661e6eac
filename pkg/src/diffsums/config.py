"""Run configuration: defaults, optionally overridden by a JSON file whose
path comes from ``--config`` or the DIFFSUMS_CONFIG environment variable."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

from .construction.step import SIEVE_LIMIT
from .construction.tree import MATERIALIZE_LIMIT
from .oracles import DIAMETER_LIMIT, EXHAUSTIVE_Q_LIMIT

CONFIG_ENV = "DIFFSUMS_CONFIG"
DEFAULT_SEED = 20140501
FORMATS = ("text", "csv", "json")


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    threads: int = 1
    materialize_limit: int = MATERIALIZE_LIMIT
    sieve_limit: int = SIEVE_LIMIT
    oracle_q_limit: int = EXHAUSTIVE_Q_LIMIT
    diameter_limit: int = DIAMETER_LIMIT
    format: str = "text"

    def __post_init__(self):
        for name in ("threads", "materialize_limit", "sieve_limit", "oracle_q_limit", "diameter_limit"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | None = None) -> RunConfig:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    with open(path) as fh:
        data = json.load(fh)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**data)
