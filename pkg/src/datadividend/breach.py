"""Breach-probability curves B(I) and their exact inverses.

Two families are provided, both positive, strictly decreasing and strictly
convex on I >= 0 with B(I) -> 0 as I -> inf:

    exponential:  B(I) = beta * exp(-rate * I)
    power_law:    B(I) = beta * (1 + I / scale) ** (-rate)

Every candidate investment used by the solver is an inverse evaluation of
B or of its slope B', so both inverses are closed-form per family.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

BISECT_TOL = 1e-12


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    POWER_LAW = "power_law"


@dataclass(frozen=True)
class BreachModel:
    family: Family
    beta: float
    rate: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        for name in ("beta", "rate", "scale"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.rate <= 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @classmethod
    def exponential(cls, beta: float, rate: float) -> "BreachModel":
        return cls(Family.EXPONENTIAL, beta, rate)

    @classmethod
    def power_law(cls, beta: float, rate: float, scale: float = 1.0) -> "BreachModel":
        return cls(Family.POWER_LAW, beta, rate, scale)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "beta": self.beta,
            "rate": self.rate,
            "scale": self.scale,
        }


def _check_investment(I: ArrayLike) -> None:
    arr = np.asarray(I, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("investment must be finite")
    if np.any(arr < 0.0):
        raise ValueError("investment must be non-negative")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def breach_prob(model: BreachModel, I: ArrayLike) -> ArrayLike:
    """Breach probability B(I); accepts scalars or arrays."""
    _check_investment(I)
    I = np.asarray(I, dtype=float)
    if model.family is Family.EXPONENTIAL:
        out = model.beta * np.exp(-model.rate * I)
    else:
        out = model.beta * np.exp(-model.rate * np.log1p(I / model.scale))
    return _scalar(out)


def breach_prob_slope(model: BreachModel, I: ArrayLike) -> ArrayLike:
    """Derivative B'(I), strictly negative."""
    _check_investment(I)
    I = np.asarray(I, dtype=float)
    if model.family is Family.EXPONENTIAL:
        out = -model.rate * model.beta * np.exp(-model.rate * I)
    else:
        c, g = model.scale, model.rate
        out = -(model.beta * g / c) * np.exp(-(g + 1.0) * np.log1p(I / c))
    return _scalar(out)


def _check_finite(x: float, name: str) -> None:
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")


def inverse_breach(model: BreachModel, target: float) -> Optional[float]:
    """The unique I >= 0 with B(I) == target, or None if 0 < target <= B(0) fails."""
    _check_finite(target, "target")
    if not 0.0 < target <= model.beta:
        return None
    ratio = model.beta / target
    if model.family is Family.EXPONENTIAL:
        I = math.log(ratio) / model.rate
    else:
        I = model.scale * math.expm1(math.log(ratio) / model.rate)
    return max(I, 0.0)


def inverse_breach_slope(model: BreachModel, slope: float) -> Optional[float]:
    """The unique I >= 0 with B'(I) == slope, or None.

    None exactly when slope < B'(0) or slope >= 0; a non-negative slope is
    never attained by a strictly decreasing convex curve.
    """
    _check_finite(slope, "slope")
    if slope >= 0.0:
        return None
    s0 = breach_prob_slope(model, 0.0)
    if slope < s0:
        return None
    ratio = s0 / slope  # >= 1
    if model.family is Family.EXPONENTIAL:
        I = math.log(ratio) / model.rate
    else:
        I = model.scale * math.expm1(math.log(ratio) / (model.rate + 1.0))
    return max(I, 0.0)


def bisect_inverse(
    func: Callable[[float], float], target: float, tol: float = BISECT_TOL
) -> Optional[float]:
    """Solve func(I) == target on I >= 0 for a strictly monotone func.

    Fallback for curves without a closed-form inverse. The bracket starts at
    [0, 1] and the upper end doubles until it straddles the target.
    """
    f0 = func(0.0) - target
    if f0 == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while (func(hi) - target) * f0 > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return None
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fm = func(mid) - target
        if fm == 0.0:
            return mid
        if fm * f0 > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
