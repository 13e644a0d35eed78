"""Seeded random instances drawn log-uniformly from fixed validity ranges."""

from __future__ import annotations

import math

import numpy as np

from .breach import BreachModel, Family
from .game import GameParams

# (low, high) for log-uniform draws; k is rounded to an integer.
PARAM_RANGES = {
    "k": (1, 100),
    "S": (1.0, 100.0),
    "F": (10.0, 1e4),
    "V": (1.0, 100.0),
    "W": (1.0, 100.0),
    "L": (0.1, 100.0),
    "alpha": (0.05, 0.95),
    "revenue_high": (100.0, 1e4),
    "revenue_low": (100.0, 1e4),
}

MODEL_RANGES = {
    Family.EXPONENTIAL: {"beta": (0.01, 1.0), "rate": (1e-3, 1.0)},
    Family.POWER_LAW: {"beta": (0.01, 1.0), "rate": (0.5, 4.0), "scale": (1.0, 1e3)},
}


def log_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    return float(math.exp(rng.uniform(math.log(low), math.log(high))))


def random_model(rng: np.random.Generator, family: Family | None = None) -> BreachModel:
    if family is None:
        family = Family.EXPONENTIAL if rng.random() < 0.5 else Family.POWER_LAW
    family = Family(family)
    draws = {name: log_uniform(rng, *bounds) for name, bounds in MODEL_RANGES[family].items()}
    return BreachModel(family, draws["beta"], draws["rate"], draws.get("scale", 1.0))


def random_params(rng: np.random.Generator, **overrides) -> GameParams:
    draws = {name: log_uniform(rng, *bounds) for name, bounds in PARAM_RANGES.items()}
    draws["k"] = int(round(draws["k"]))
    draws.update(overrides)
    return GameParams(**draws)


def random_instances(seed: int, count: int) -> list[tuple[GameParams, BreachModel]]:
    rng = np.random.default_rng(seed)
    return [(random_params(rng), random_model(rng)) for _ in range(count)]
