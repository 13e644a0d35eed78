"""Closed-form Stackelberg solution of the platform/users data-dividend game.

For a target sharing level the platform's problem reduces to a single
variable I. With effective valuation v(I) = (V - W) + B(I) L the cheapest
dividend inducing the level is piecewise linear in v, giving two sub-cases:

    level  sub-case   dividend        breach-loss coefficient
    high   v >= 0     p1 = v          F + L k
    high   v <= 0     p1 = 0          F
    low    v >= 0     p0 = a v        F + a L k
    low    v <= 0     p0 = (a-1) v    F + (a-1) L k

(a = alpha). Each sub-case minimizes B(I) * coef + I + const; its
stationary point is B'^{-1}(-1/coef) (I1, I3, I4, I5 in the table below)
and the boundary v(I) = 0 sits at I2 = B^{-1}(-(V - W)/L).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

from .breach import BreachModel, breach_prob, inverse_breach, inverse_breach_slope
from .game import (
    GameParams,
    PlatformDecision,
    SharingLevel,
    effective_valuation,
    platform_utility,
    tolerance,
    user_best_response,
    user_utility,
)

BOUNDARY_RTOL = 1e-9


class Regime(str, enum.Enum):
    """Row of the closed-form regime table.

    PAY_DIVIDEND and NO_INVEST_PAY are the v >= 0 rows (stationary point or
    I = 0), INVEST_TO_BOUNDARY is the I2 row where v = 0 and nothing is paid,
    INVEST_UNCONSTRAINED and NO_INVEST_NO_PAY are the v <= 0 rows. In the
    low-sharing case the v <= 0 rows still pay p0 = (alpha - 1) v, the
    premium that keeps users away from high sharing.
    """

    PAY_DIVIDEND = "PayDividend"
    INVEST_TO_BOUNDARY = "InvestToBoundary"
    INVEST_UNCONSTRAINED = "InvestUnconstrained"
    NO_INVEST_PAY = "NoInvestPay"
    NO_INVEST_NO_PAY = "NoInvestNoPay"


class EquilibriumError(RuntimeError):
    """The closed-form decision failed its incentive or participation check."""


@dataclass(frozen=True)
class CandidateInvestments:
    I1: Optional[float]
    I2: Optional[float]
    I3: Optional[float]
    I4: Optional[float]
    I5: Optional[float]

    def to_dict(self) -> dict:
        return {f"I{j}": getattr(self, f"I{j}") for j in range(1, 6)}


@dataclass(frozen=True)
class CaseSolution:
    level: SharingLevel
    feasible: bool
    decision: Optional[PlatformDecision] = None
    regime: Optional[Regime] = None
    platform_utility: Optional[float] = None
    user_utility: Optional[float] = None
    # decision lies within BOUNDARY_RTOL of a regime threshold
    boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "feasible": self.feasible,
            "decision": self.decision.to_dict() if self.decision else None,
            "regime": self.regime.value if self.regime else None,
            "platform_utility": self.platform_utility,
            "user_utility": self.user_utility,
            "boundary": self.boundary,
        }


@dataclass(frozen=True)
class Equilibrium:
    chosen: CaseSolution
    case1: CaseSolution
    case2: CaseSolution
    tie_broken: bool
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen.to_dict(),
            "case1": self.case1.to_dict(),
            "case2": self.case2.to_dict(),
            "tie_broken": self.tie_broken,
            "warnings": list(self.warnings),
        }


class _SubCase(NamedTuple):
    coef: float  # effective breach loss multiplying B(I)
    factor: float  # dividend = factor * v(I)


def _subcases(params: GameParams, level: SharingLevel) -> tuple[_SubCase, _SubCase]:
    F, Lk, a = params.F, params.L * params.k, params.alpha
    if level is SharingLevel.HIGH:
        return _SubCase(F + Lk, 1.0), _SubCase(F, 0.0)
    return _SubCase(F + a * Lk, a), _SubCase(F + (a - 1.0) * Lk, a - 1.0)


def _stationary(model: BreachModel, coef: float) -> Optional[float]:
    # With coef <= 0 the reduced objective has derivative >= 1 everywhere.
    if coef <= 0.0:
        return None
    return inverse_breach_slope(model, -1.0 / coef)


def _boundary_investment(params: GameParams, model: BreachModel) -> Optional[float]:
    if params.L <= 0.0 or params.vbar >= 0.0:
        return None
    return inverse_breach(model, -params.vbar / params.L)


def candidate_investments(params: GameParams, model: BreachModel) -> CandidateInvestments:
    high_pay, high_nopay = _subcases(params, SharingLevel.HIGH)
    low_pay, low_nopay = _subcases(params, SharingLevel.LOW)
    return CandidateInvestments(
        I1=_stationary(model, high_pay.coef),
        I2=_boundary_investment(params, model),
        I3=_stationary(model, high_nopay.coef),
        I4=_stationary(model, low_pay.coef),
        I5=_stationary(model, low_nopay.coef),
    )


def _level_candidates(params, model, level):
    pay, nopay = _subcases(params, level)
    return _stationary(model, pay.coef), _stationary(model, nopay.coef)


def _build(params, model, level, I, price, regime, boundary=False) -> CaseSolution:
    price = price if price > 0.0 else 0.0
    if level is SharingLevel.HIGH:
        d = PlatformDecision(I, 0.0, price)
    else:
        d = PlatformDecision(I, price, 0.0)
    return CaseSolution(
        level=level,
        feasible=True,
        decision=d,
        regime=regime,
        platform_utility=platform_utility(params, model, d, level),
        user_utility=user_utility(params, model, d, level),
        boundary=boundary,
    )


def _infeasible(level: SharingLevel) -> CaseSolution:
    return CaseSolution(level=level, feasible=False)


def _v_tol(params: GameParams, model: BreachModel, I: float) -> float:
    return tolerance(params.vbar, breach_prob(model, I) * params.L)


def _solve_pay(params: GameParams, model: BreachModel, level: SharingLevel) -> CaseSolution:
    """Sub-case v >= 0: minimize B(I) coef + I + factor (V - W) k s.t. v(I) >= 0."""
    sub, _ = _subcases(params, level)
    I_stat = _stationary(model, sub.coef)
    vbar = params.vbar

    def pay_at(I, regime):
        return _build(params, model, level, I, sub.factor * effective_valuation(params, model, I), regime)

    if vbar >= 0.0:
        if I_stat is not None:
            return pay_at(I_stat, Regime.PAY_DIVIDEND)
        return pay_at(0.0, Regime.NO_INVEST_PAY)
    if I_stat is not None:
        if effective_valuation(params, model, I_stat) >= -_v_tol(params, model, I_stat):
            return pay_at(I_stat, Regime.PAY_DIVIDEND)
        I2 = _boundary_investment(params, model)
        if I2 is None:
            return _infeasible(level)
        return _build(params, model, level, I2, 0.0, Regime.INVEST_TO_BOUNDARY)
    if effective_valuation(params, model, 0.0) >= -_v_tol(params, model, 0.0):
        return pay_at(0.0, Regime.NO_INVEST_PAY)
    return _infeasible(level)


def _solve_nopay(params: GameParams, model: BreachModel, level: SharingLevel) -> CaseSolution:
    """Sub-case v <= 0: minimize B(I) coef + I + factor (V - W) k s.t. v(I) <= 0."""
    _, sub = _subcases(params, level)
    I_stat = _stationary(model, sub.coef)
    vbar = params.vbar

    def settle_at(I, regime):
        return _build(params, model, level, I, sub.factor * effective_valuation(params, model, I), regime)

    if vbar > 0.0:
        return _infeasible(level)
    if params.L <= 0.0:
        if I_stat is not None:
            return settle_at(I_stat, Regime.INVEST_UNCONSTRAINED)
        return settle_at(0.0, Regime.NO_INVEST_NO_PAY)
    start = I_stat if I_stat is not None else 0.0
    if effective_valuation(params, model, start) <= _v_tol(params, model, start):
        regime = Regime.INVEST_UNCONSTRAINED if I_stat is not None else Regime.NO_INVEST_NO_PAY
        return settle_at(start, regime)
    I2 = _boundary_investment(params, model)
    if I2 is None:
        return _infeasible(level)
    return _build(params, model, level, I2, 0.0, Regime.INVEST_TO_BOUNDARY)


def solve_case1_pay(params: GameParams, model: BreachModel) -> CaseSolution:
    return _solve_pay(params, model, SharingLevel.HIGH)


def solve_case1_nopay(params: GameParams, model: BreachModel) -> CaseSolution:
    return _solve_nopay(params, model, SharingLevel.HIGH)


def solve_case2_pay(params: GameParams, model: BreachModel) -> CaseSolution:
    return _solve_pay(params, model, SharingLevel.LOW)


def solve_case2_nopay(params: GameParams, model: BreachModel) -> CaseSolution:
    return _solve_nopay(params, model, SharingLevel.LOW)


def _solve_level(params: GameParams, model: BreachModel, level: SharingLevel) -> CaseSolution:
    pay, nopay = _subcases(params, level)
    I_pay, I_nopay = _level_candidates(params, model, level)

    if params.vbar >= 0.0:
        I = I_pay if I_pay is not None else 0.0
        regime = Regime.PAY_DIVIDEND if I_pay is not None else Regime.NO_INVEST_PAY
        sol = _build(params, model, level, I, pay.factor * effective_valuation(params, model, I), regime)
    else:
        # I_nopay <= I_pay because the nopay coefficient is smaller.
        a = I_pay if I_pay is not None else 0.0
        b = I_nopay if I_nopay is not None else 0.0
        v_a = effective_valuation(params, model, a)
        v_b = effective_valuation(params, model, b)
        # Thresholds compare L against -vbar / B(x); v(x) > 0 is the same test.
        # Boundary points fall to the lower-L row.
        if v_a > _v_tol(params, model, a):
            regime = Regime.PAY_DIVIDEND if I_pay is not None else Regime.NO_INVEST_PAY
            sol = _build(params, model, level, a, pay.factor * v_a, regime)
        elif v_b > _v_tol(params, model, b):
            I2 = _boundary_investment(params, model)
            sol = _build(params, model, level, I2, 0.0, Regime.INVEST_TO_BOUNDARY)
        else:
            regime = Regime.INVEST_UNCONSTRAINED if I_nopay is not None else Regime.NO_INVEST_NO_PAY
            sol = _build(params, model, level, b, nopay.factor * v_b, regime)
        scale = max(abs(params.vbar), 1e-300)
        near = any(abs(v) <= BOUNDARY_RTOL * scale for v in (v_a, v_b))
        if near:
            sol = replace(sol, boundary=True)

    if __debug__:
        # Cross-sub-case dominance: the regime pick is never worse than either sub-case.
        for sub in (_solve_pay(params, model, level), _solve_nopay(params, model, level)):
            if sub.feasible:
                slack = tolerance(sub.platform_utility, params.revenue_high, params.revenue_low) * 1e3
                assert sol.platform_utility >= sub.platform_utility - slack, (
                    f"regime pick {sol.regime} beaten by sub-case {sub.regime}"
                )
    return sol


def solve_case1(params: GameParams, model: BreachModel) -> CaseSolution:
    """Best decision that makes every user share at the high level."""
    return _solve_level(params, model, SharingLevel.HIGH)


def solve_case2(params: GameParams, model: BreachModel) -> CaseSolution:
    """Best decision that makes every user share at the low level."""
    return _solve_level(params, model, SharingLevel.LOW)


def regime_thresholds(
    params: GameParams, model: BreachModel, level: SharingLevel
) -> tuple[Optional[float], Optional[float]]:
    """(-vbar / B(I_pay), -vbar / B(I_nopay)) for vbar <= 0, None where undefined."""
    if params.vbar > 0.0:
        return None, None
    out = []
    for I in _level_candidates(params, model, SharingLevel(level)):
        out.append(None if I is None else -params.vbar / breach_prob(model, I))
    return out[0], out[1]


def solve_equilibrium(params: GameParams, model: BreachModel) -> Equilibrium:
    case1 = solve_case1(params, model)
    case2 = solve_case2(params, model)
    u1, u2 = case1.platform_utility, case2.platform_utility
    tie = abs(u1 - u2) <= tolerance(u1, u2)
    chosen = case1 if tie or u1 > u2 else case2

    br = user_best_response(params, model, chosen.decision)
    if tie and br.choice is not chosen.level:
        # Near-tie where users are also indifferent and the platform-favoured
        # response lands on the other level: that case is the consistent pick.
        chosen = case2
        br = user_best_response(params, model, chosen.decision)
    if br.choice is not chosen.level or not br.participates:
        raise EquilibriumError(
            f"decision {chosen.decision} induces {br.choice.value} "
            f"(participates={br.participates}), expected {chosen.level.value}"
        )
    warnings = []
    if chosen.platform_utility < 0.0:
        warnings.append("negative_platform_utility")
    return Equilibrium(chosen, case1, case2, tie_broken=tie, warnings=tuple(warnings))
