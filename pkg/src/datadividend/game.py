"""Model parameters, the two utility functions and the users' best response."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .breach import ArrayLike, BreachModel, breach_prob

# Inputs above this magnitude make fixed tolerances meaningless in doubles.
MAX_MAGNITUDE = 1e9
TIE_TOL = 1e-12


def tolerance(*values: float) -> float:
    """Indifference tolerance: TIE_TOL scaled by the money magnitudes in play."""
    return TIE_TOL * max(1.0, *(abs(float(v)) for v in values))


class SharingLevel(str, enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class GameParams:
    """Scalar model inputs for k homogeneous users.

    revenue_high is the platform revenue when every user shares at the high
    level, revenue_low when every user shares at the low level.
    """

    k: int
    S: float
    F: float
    V: float
    W: float
    L: float
    alpha: float
    revenue_high: float
    revenue_low: float

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        for name in ("S", "F", "V", "W", "L", "alpha", "revenue_high", "revenue_low"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or abs(value) > MAX_MAGNITUDE:
                raise ValueError(f"{name} must be finite with magnitude <= 1e9, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("S", "F", "V", "W", "L"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.k > MAX_MAGNITUDE:
            raise ValueError("k must be <= 1e9")

    @property
    def vbar(self) -> float:
        """Net data valuation V - W."""
        return self.V - self.W

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PlatformDecision:
    I: float
    p0: float
    p1: float

    def __post_init__(self) -> None:
        for name in ("I", "p0", "p1"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
            object.__setattr__(self, name, value)

    def to_dict(self) -> dict:
        return {"I": self.I, "p0": self.p0, "p1": self.p1}


class BestResponse(NamedTuple):
    choice: SharingLevel
    tied: bool
    participates: bool


def effective_valuation(params: GameParams, model: BreachModel, I: ArrayLike) -> ArrayLike:
    """(V - W) + B(I) * L: the user's net perceived cost of high sharing. May be negative."""
    return params.vbar + breach_prob(model, I) * params.L


def platform_utility(
    params: GameParams, model: BreachModel, d: PlatformDecision, level: SharingLevel
) -> float:
    return _platform_utility(params, model, d.I, d.p0, d.p1, SharingLevel(level))


def _platform_utility(params, model, I, p0, p1, level: SharingLevel):
    # b users share low; homogeneity makes b either 0 or k.
    if level is SharingLevel.LOW:
        revenue, paid = params.revenue_low, p0
    else:
        revenue, paid = params.revenue_high, p1
    return revenue - breach_prob(model, I) * params.F - I - params.S - paid * params.k


def user_utility(
    params: GameParams, model: BreachModel, d: PlatformDecision, c: SharingLevel
) -> float:
    v = effective_valuation(params, model, d.I)
    if SharingLevel(c) is SharingLevel.HIGH:
        return d.p1 - v
    return d.p0 - params.alpha * v


def user_best_response(
    params: GameParams, model: BreachModel, d: PlatformDecision
) -> BestResponse:
    """Utility-maximizing sharing level for a (homogeneous) user.

    On indifference `tied` is set and the platform-favoured level is chosen;
    `participates` reports whether the maximized utility is non-negative.
    """
    high = user_utility(params, model, d, SharingLevel.HIGH)
    low = user_utility(params, model, d, SharingLevel.LOW)
    v = effective_valuation(params, model, d.I)
    tol = tolerance(params.vbar, v, d.p0, d.p1)
    tied = abs(high - low) <= tol
    if tied:
        u_high = platform_utility(params, model, d, SharingLevel.HIGH)
        u_low = platform_utility(params, model, d, SharingLevel.LOW)
        choice = SharingLevel.LOW if u_low > u_high else SharingLevel.HIGH
    else:
        choice = SharingLevel.HIGH if high > low else SharingLevel.LOW
    return BestResponse(choice, tied, max(high, low) >= -tol)
