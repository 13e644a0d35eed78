"""Stackelberg equilibrium of the platform/users data-dividend game."""

from .breach import (
    BreachModel,
    Family,
    breach_prob,
    breach_prob_slope,
    inverse_breach,
    inverse_breach_slope,
)
from .game import (
    BestResponse,
    GameParams,
    PlatformDecision,
    SharingLevel,
    effective_valuation,
    platform_utility,
    user_best_response,
    user_utility,
)
from .solver import (
    CandidateInvestments,
    CaseSolution,
    Equilibrium,
    EquilibriumError,
    Regime,
    candidate_investments,
    regime_thresholds,
    solve_case1,
    solve_case1_nopay,
    solve_case1_pay,
    solve_case2,
    solve_case2_nopay,
    solve_case2_pay,
    solve_equilibrium,
)

__version__ = "0.1.0"
