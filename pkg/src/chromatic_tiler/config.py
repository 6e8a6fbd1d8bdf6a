"""Run configuration shared by the pipeline and the command line."""

import math
import os
from dataclasses import asdict, dataclass, field, fields

from .errors import InputError

CONSTRUCTIONS = ("hexagonal", "square", "ball-generic", "explicit")
THREADS_ENV = "CHROMATIC_TILER_THREADS"


@dataclass
class RunConfig:
    construction: str = "hexagonal"
    n: int | None = None
    body: dict = field(default_factory=lambda: {"kind": "ball"})
    eta: float = 1e-6
    delta: float | None = None
    sat_res: int | None = None
    cand_res: int | None = None
    lift_res: int | None = None
    pair_samples: int | None = None
    seed: int = 0
    # explicit construction: {"lattice_basis": [...], "translates": [...], "cells": [{"normals", "offsets"}]}
    explicit: dict | None = None

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise InputError(f"construction must be one of {CONSTRUCTIONS}, got {self.construction!r}")
        if self.construction in ("hexagonal",):
            if self.n not in (None, 2):
                raise InputError("the hexagonal construction is two-dimensional")
            self.n = 2
        if self.construction == "square":
            self.n = 2 if self.n is None else self.n
        if self.construction == "ball-generic" and self.n is None:
            raise InputError("ball-generic needs n")
        if self.construction == "explicit":
            if not self.explicit:
                raise InputError("explicit construction needs an 'explicit' block")
            self.n = len(self.explicit["lattice_basis"])
        if int(self.n) != self.n or self.n < 1:
            raise InputError("n must be a positive integer")
        self.n = int(self.n)
        if not 0 < self.eta < 0.01:
            raise InputError("eta must lie in (0, 0.01)")
        if self.delta is not None and not 0 < self.delta < 1:
            raise InputError("delta must lie in (0, 1)")
        for name in ("sat_res", "cand_res", "lift_res"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 2):
                raise InputError(f"{name} must be an integer >= 2")
        if self.pair_samples is not None and (int(self.pair_samples) != self.pair_samples or self.pair_samples < 0):
            raise InputError("pair_samples must be a non-negative integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.body, dict) or "kind" not in self.body:
            raise InputError("body must be an object with a 'kind' key")

    @property
    def resolved_delta(self):
        if self.delta is not None:
            return float(self.delta)
        if self.n < 2:
            raise InputError("the default delta 1/(2n ln n) needs n >= 2")
        return 1.0 / (2 * self.n * math.log(self.n))

    @property
    def resolved_lift_res(self):
        return self.lift_res or {1: 4096, 2: 512, 3: 64}.get(self.n, 16)

    @property
    def resolved_pair_samples(self):
        if self.pair_samples is not None:
            return self.pair_samples
        return 100_000 if self.n <= 2 else 10_000

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InputError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, KeyError, ValueError) as e:
            if isinstance(e, InputError):
                raise
            raise InputError(f"malformed config: {e}") from e

    def to_dict(self):
        return asdict(self)


def thread_count():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return min(8, os.cpu_count() or 1)
    try:
        t = int(raw)
    except ValueError as e:
        raise InputError(f"{THREADS_ENV} must be a positive integer") from e
    if t < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer")
    return t
