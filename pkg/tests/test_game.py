import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_params
from datadividend import (
    BreachModel,
    PlatformDecision,
    SharingLevel,
    effective_valuation,
    platform_utility,
    user_best_response,
    user_utility,
)

HIGH, LOW = SharingLevel.HIGH, SharingLevel.LOW
EXP = BreachModel.exponential(0.5, 0.1)


def test_effective_valuation_examples():
    assert effective_valuation(make_params(V=20, W=30, L=50), EXP, 0.0) == pytest.approx(15.0, rel=1e-15)
    for I in (0.0, 3.0, 1e3):
        assert effective_valuation(make_params(V=30, W=30, L=0), EXP, I) == 0.0
    # B(10 ln 30) = 0.5 / 30 = 1/60
    v = effective_valuation(make_params(V=29.9, W=30, L=50), EXP, 10 * math.log(30))
    assert v == pytest.approx(-0.1 + 50 / 60, rel=1e-12)
    assert v == pytest.approx(0.73333, abs=1e-5)


def test_vbar_is_read_only():
    p = make_params(V=20, W=30)
    assert p.vbar == -10.0
    with pytest.raises(AttributeError):
        p.vbar = 3.0


def test_platform_utility_examples():
    p = make_params(revenue_high=500, F=100, S=10, k=10)
    d = PlatformDecision(10 * math.log(2.5), 0.0, 0.0)  # B = 0.2
    assert platform_utility(p, EXP, d, HIGH) == pytest.approx(500 - 20 - 10 * math.log(2.5) - 10, rel=1e-14)
    assert platform_utility(p, EXP, d, HIGH) == pytest.approx(460.837, abs=1e-3)

    zero = make_params(S=0, F=0, V=0, W=0, L=0, revenue_high=0, revenue_low=0)
    for level in (HIGH, LOW):
        assert platform_utility(zero, EXP, PlatformDecision(0, 0, 0), level) == 0.0

    I4 = 10 * math.log(17.5)  # B = 1/35
    d = PlatformDecision(I4, 0.5 * (10 + 50 / 35), 0.0)
    got = platform_utility(make_params(revenue_low=300), EXP, d, LOW)
    assert got == pytest.approx(300 - 100 / 35 - I4 - 10 - 10 * d.p0, rel=1e-14)
    assert got == pytest.approx(201.38, abs=1e-2)


def test_user_utility_examples():
    p = make_params(V=33, W=30, L=0)  # v = 3
    assert user_utility(p, EXP, PlatformDecision(0, 0, 5), HIGH) == pytest.approx(2.0)
    p = make_params(V=34, W=30, L=0, alpha=0.25)  # v = 4
    assert user_utility(p, EXP, PlatformDecision(0, 0.25 * 4, 0), LOW) == 0.0
    assert user_utility(p, EXP, PlatformDecision(0, 0, 4), HIGH) == 0.0


def test_best_response_examples():
    p = make_params(V=33, W=30, L=0, alpha=0.5)
    br = user_best_response(p, EXP, PlatformDecision(0, 0, 5))
    assert br.choice is HIGH and br.participates and not br.tied

    p = make_params(V=30, W=30, L=0)
    br = user_best_response(p, EXP, PlatformDecision(0, 0, 0))
    assert br.tied and br.participates

    p = make_params(V=34, W=30, L=0, alpha=0.5)
    br = user_best_response(p, EXP, PlatformDecision(0, 0, 0))
    assert br.choice is LOW and not br.participates and not br.tied


def test_tie_resolves_toward_platform():
    # v = 0, no dividends: users indifferent, the platform prefers the richer level
    richer_low = make_params(V=30, W=30, L=0, revenue_high=100, revenue_low=200)
    assert user_best_response(richer_low, EXP, PlatformDecision(0, 0, 0)).choice is LOW
    richer_high = make_params(V=30, W=30, L=0, revenue_high=200, revenue_low=100)
    assert user_best_response(richer_high, EXP, PlatformDecision(0, 0, 0)).choice is HIGH


@pytest.mark.parametrize(
    "kw",
    [dict(k=0), dict(k=2.5), dict(alpha=0.0), dict(alpha=1.0), dict(S=-1), dict(F=-1), dict(L=-0.1),
     dict(V=math.nan), dict(revenue_high=2e9), dict(W=math.inf)],
)
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        make_params(**kw)


def test_invalid_decision():
    with pytest.raises(ValueError):
        PlatformDecision(-1, 0, 0)
    with pytest.raises(ValueError):
        PlatformDecision(0, math.inf, 0)


money = st.one_of(st.just(0.0), st.floats(1e-3, 100.0))
decisions = st.builds(PlatformDecision, st.floats(0.0, 500.0), money, money)
param_sets = st.builds(
    make_params,
    V=money, W=money, L=money, alpha=st.floats(0.01, 0.99), S=money, F=st.floats(0.0, 1e3),
)


@settings(max_examples=200, deadline=None)
@given(param_sets, decisions, st.floats(1e-3, 10.0))
def test_user_utility_unit_slopes(p, d, delta):
    bump1 = PlatformDecision(d.I, d.p0, d.p1 + delta)
    bump0 = PlatformDecision(d.I, d.p0 + delta, d.p1)
    assert user_utility(p, EXP, bump1, HIGH) - user_utility(p, EXP, d, HIGH) == pytest.approx(delta, abs=1e-9)
    assert user_utility(p, EXP, bump1, LOW) == user_utility(p, EXP, d, LOW)
    assert user_utility(p, EXP, bump0, LOW) - user_utility(p, EXP, d, LOW) == pytest.approx(delta, abs=1e-9)
    assert user_utility(p, EXP, bump0, HIGH) == user_utility(p, EXP, d, HIGH)


@settings(max_examples=200, deadline=None)
@given(param_sets, decisions, st.floats(1e-3, 10.0))
def test_raising_a_price_never_drives_users_away_from_it(p, d, delta):
    if user_best_response(p, EXP, d).choice is HIGH:
        assert user_best_response(p, EXP, PlatformDecision(d.I, d.p0, d.p1 + delta)).choice is HIGH
    else:
        assert user_best_response(p, EXP, PlatformDecision(d.I, d.p0 + delta, d.p1)).choice is LOW


@settings(max_examples=200, deadline=None)
@given(param_sets, decisions, st.floats(1e-3, 10.0))
def test_platform_utility_monotone(p, d, delta):
    assert platform_utility(p, EXP, PlatformDecision(d.I, d.p0 + delta, d.p1), LOW) < platform_utility(p, EXP, d, LOW)
    assert platform_utility(p, EXP, PlatformDecision(d.I, d.p0, d.p1 + delta), HIGH) < platform_utility(p, EXP, d, HIGH)
    costlier = make_params(**{**p.to_dict(), "S": p.S + delta})
    for level in (HIGH, LOW):
        assert platform_utility(costlier, EXP, d, level) < platform_utility(p, EXP, d, level)


@settings(max_examples=200, deadline=None)
@given(param_sets, st.floats(0.0, 100.0), st.floats(0.01, 50.0))
def test_valuation_monotone_in_investment(p, I, step):
    a, b = effective_valuation(p, EXP, I), effective_valuation(p, EXP, I + step)
    if p.L > 0:
        assert b < a
    else:
        assert a == b
