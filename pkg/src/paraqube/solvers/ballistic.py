"""Momentum dynamics on the relaxed Ising energy, in the spirit of ballistic
simulated bifurcation.

Spins are continuous positions in ``[-1, 1]``. A pump term that starts as a
confining well and is ramped down to zero pushes positions towards the walls,
where they stick with zero momentum. Final signs give the bit assignment.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from ..qubo import QuboInstance, to_ising
from .samples import SampleSet, config_digest


@dataclass(frozen=True)
class BallisticConfig:
    steps: int = 1000
    step_size: float = 0.5
    momentum_decay: float = 0.0
    restarts: int = 100

    def __post_init__(self):
        if self.steps < 1 or self.restarts < 1:
            raise ValueError("steps and restarts must be positive")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0 <= self.momentum_decay < 1:
            raise ValueError("momentum_decay must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "BallisticConfig":
        return cls(**{k: d[k] for k in ("steps", "step_size", "momentum_decay", "restarts") if k in d})


def ballistic_solve(instance: QuboInstance, cfg: BallisticConfig = BallisticConfig(), seed: int = 0) -> SampleSet:
    ising = to_ising(instance)
    n = instance.n_bits
    j = np.zeros((n, n))
    j[ising.rows, ising.cols] = ising.J
    j = j + j.T
    h = ising.h
    # coupling scale so the energy force is comparable to the unit pump
    scale = np.sqrt((j**2).sum() / max(n, 1) + (h**2).sum() / max(n, 1))
    c0 = 0.5 / (scale * np.sqrt(max(n, 1))) if scale > 0 else 1.0

    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    x = rng.uniform(-0.1, 0.1, size=(cfg.restarts, n))
    y = np.zeros_like(x)
    keep = 1.0 - cfg.momentum_decay
    dt = cfg.step_size
    for t in range(cfg.steps):
        pump = 1.0 - t / cfg.steps
        force = -pump * x - c0 * (x @ j + h)
        y = keep * y + dt * force
        x = x + dt * y
        wall = np.abs(x) > 1.0
        x[wall] = np.sign(x[wall])
        y[wall] = 0.0
    bits = (x > 0).astype(np.uint8)
    wall_time = time.perf_counter() - start
    meta = {"solver": "ballistic", "config": config_digest(asdict(cfg)), "seed": seed, "wall_time": wall_time}
    return SampleSet.from_bits(instance, bits, meta)
