import json
import math

import numpy as np
import pytest

from conftest import make_params
from datadividend import BreachModel, Regime, SharingLevel, breach_prob, candidate_investments
from datadividend.oracle import OracleConfig, brute_force_equilibrium
from datadividend.sweep import (
    SWEEP_COLUMNS,
    ConfigError,
    ScenarioConfig,
    SweepSpec,
    apply_parameter,
    find_transition,
    parse_config,
    rows_to_csv,
    run_solve,
    run_sweep,
    run_verify,
)
from table_one import close, table_rows

EXP = BreachModel.exponential(0.5, 0.1)


def document(sweep=None, **overrides):
    params = make_params(**overrides).to_dict()
    doc = {"params": params, "model": {"family": "exponential", "beta": 0.5, "rate": 0.1}}
    if sweep is not None:
        doc["sweep"] = sweep
    return doc


def config(sweep=None, **overrides):
    return parse_config(json.dumps(document(sweep, **overrides)))


def test_minimal_document_round_trips():
    cfg = config(V=20, W=30)
    assert cfg.params == make_params(V=20, W=30)
    assert cfg.model == EXP
    assert cfg.oracle == OracleConfig()
    assert cfg.sweep is None


def test_alpha_out_of_domain_names_path():
    doc = document()
    doc["params"]["alpha"] = 1.0
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    assert err.value.path == "params.alpha"


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.pop("model"), None),
        (lambda d: d["params"].pop("k"), "params.k"),
        (lambda d: d["params"].update(k="ten"), "params.k"),
        (lambda d: d["params"].update(extra=1), "params.extra"),
        (lambda d: d.update(plots={}), "plots"),
        (lambda d: d["model"].update(family="weibull"), "model.family"),
        (lambda d: d["model"].update(beta=2.0), "model.beta"),
        (lambda d: d.update(oracle={"grid_points": 4}), "oracle.grid_points"),
        (lambda d: d.update(sweep={"parameter": "S", "start": 0, "stop": 1, "steps": 5}), "sweep.parameter"),
        (lambda d: d.update(sweep={"parameter": "L", "start": 0, "stop": 1, "steps": 1}), "sweep.steps"),
        (lambda d: d.update(sweep={"parameter": "L", "start": 0, "stop": 1}), "sweep.steps"),
        (lambda d: d.update(sweep={"parameter": "alpha", "start": 0.1, "stop": 1.0, "steps": 5}), "sweep.stop"),
        (lambda d: d.update(sweep={"parameter": "L", "start": -1, "stop": 1, "steps": 5}), "sweep.start"),
        (lambda d: d.update(sweep={"parameter": "k", "start": 1, "stop": 2, "steps": 3}), "sweep"),
    ],
)
def test_invalid_documents(mutate, path):
    doc = document()
    mutate(doc)
    if path is None:  # a missing model is allowed for verify but not for solve
        with pytest.raises(ConfigError):
            run_solve(parse_config(doc))
        return
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    assert err.value.path == path


def test_malformed_json():
    with pytest.raises(ConfigError):
        parse_config('{"params": ')
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


def test_l_sweep_has_one_row_per_step():
    cfg = config({"parameter": "L", "start": 0, "stop": 200, "steps": 201}, V=20, W=30)
    rows = run_sweep(cfg)
    assert len(rows) == 201
    assert [r.value for r in rows] == [float(x) for x in np.linspace(0, 200, 201)]
    assert rows[0].transition is False
    changes = [i for i in range(1, len(rows)) if (rows[i].level, rows[i].regime) != (rows[i - 1].level, rows[i - 1].regime)]
    assert changes == [i for i, r in enumerate(rows) if r.transition]
    assert changes  # the instance crosses at least one regime boundary


def test_csv_is_stable():
    cfg = config({"parameter": "L", "start": 0, "stop": 50, "steps": 11}, V=20, W=30)
    text = rows_to_csv(run_sweep(cfg))
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert len(text.splitlines()) == 12
    assert "\r" not in text and text.endswith("\n")
    assert rows_to_csv(run_sweep(cfg)) == text
    # shortest round-trip floats
    first = text.splitlines()[1].split(",")
    assert float(first[SWEEP_COLUMNS.index("I")]) == run_sweep(cfg)[0].I


def test_solve_reports():
    rep = run_solve(config(V=30, W=20, L=50))
    assert rep["equilibrium"]["chosen"]["level"] == "high"
    assert rep["equilibrium"]["chosen"]["platform_utility"] == pytest.approx(345.99, abs=1e-2)
    json.dumps(rep)

    zero = run_solve(config(S=0, F=0, V=0, W=0, L=0, revenue_high=0, revenue_low=0))
    chosen = zero["equilibrium"]["chosen"]
    assert chosen["platform_utility"] == 0.0
    assert chosen["decision"] == {"I": 0.0, "p0": 0.0, "p1": 0.0}

    rep = run_solve(config(V=20, W=30, L=50))
    chosen = rep["equilibrium"]["chosen"]
    assert chosen["level"] == "high"
    assert chosen["decision"]["I"] == pytest.approx(10 * math.log(5), rel=1e-13)
    assert rep["warnings"] == []


def test_solve_warnings():
    assert "negative_platform_utility" in run_solve(config(S=1e4))["warnings"]
    cfg = config(V=30, W=20, L=50)
    near = ScenarioConfig(cfg.params, cfg.model, OracleConfig(I_max=30.0))
    assert "investment_near_ceiling" in run_solve(near)["warnings"]


def test_threshold_sweep_shape():
    """V̄ = -0.1: no dividend until L = -V̄/B(I1(L)), then a rising one."""
    cfg = config({"parameter": "L", "start": 0, "stop": 50, "steps": 501}, V=29.9, W=30)
    rows = run_sweep(cfg)
    threshold = 0.1 * 0.1 * 100 / (1 - 0.1 * 0.1 * 10)
    assert threshold == pytest.approx(1.111, abs=1e-3)
    found = find_transition(cfg.params, cfg.model, "L", 0.0, 50.0, lambda eq: eq.chosen.decision.p1 > 0)
    assert found == pytest.approx(threshold, abs=1e-6)
    below = [r for r in rows if r.value <= threshold]
    above = [r for r in rows if r.value > threshold]
    assert all(r.p1 == 0.0 for r in below)
    assert all(b.p1 > a.p1 for a, b in zip(above, above[1:]))
    assert above[0].p1 > 0
    for L in (0.5, 1.0, 2.0, 10.0, 40.0):
        p = make_params(V=29.9, W=30, L=L)
        res = brute_force_equilibrium(p, EXP)
        row = min(rows, key=lambda r: abs(r.value - L))
        assert res.decision.p1 == pytest.approx(row.p1, abs=1e-2)


def test_floor_sweep_shape():
    rows = run_sweep(config({"parameter": "L", "start": 0, "stop": 200, "steps": 50}, V=30, W=20))
    assert all(r.level == "high" for r in rows)
    assert rows[0].p1 == 10.0
    assert all(r.p1 > 10.0 for r in rows[1:])


def test_case2_zero_band():
    # k = 1 so the paying row returns once L > |V̄| λ F / (1 - |V̄| λ α k) = 200
    cfg = config({"parameter": "L", "start": 0, "stop": 400, "steps": 401}, V=20, W=30, k=1,
                 revenue_high=0, revenue_low=1e6)
    rows = run_sweep(cfg)
    assert all(r.level == "low" for r in rows)
    zero = [i for i, r in enumerate(rows) if r.p0 == 0.0]
    assert zero and zero == list(range(zero[0], zero[-1] + 1))  # a single band
    assert 0 < zero[0] and zero[-1] < len(rows) - 1  # paid on both sides
    for r in rows:
        assert (r.p0 == 0.0) == (abs(r.valuation) <= 1e-9)


def test_thresholds_in_rows():
    cfg = config({"parameter": "L", "start": 10, "stop": 20, "steps": 3}, V=20, W=30)
    for r in run_sweep(cfg):
        p = make_params(V=20, W=30, L=r.value)
        c = candidate_investments(p, EXP)
        assert r.threshold_nopay == pytest.approx(10 / breach_prob(EXP, c.I3), rel=1e-12)
        assert r.threshold_pay == pytest.approx(10 / breach_prob(EXP, c.I1), rel=1e-12)


@pytest.mark.parametrize("parameter, start, stop", [
    ("L", 0, 300), ("F", 1, 1e4), ("V", 0, 60), ("W", 0, 60), ("alpha", 0.05, 0.95),
    ("k", 1, 41), ("beta", 0.05, 1.0), ("rate", 0.01, 1.0),
])
def test_every_row_obeys_its_table_row(parameter, start, stop):
    cfg = config({"parameter": parameter, "start": start, "stop": stop, "steps": 41}, V=20, W=30)
    for r in run_sweep(cfg):
        p, m = apply_parameter(cfg.params, cfg.model, parameter, r.value)
        matches = [row for row in table_rows(p, m, SharingLevel(r.level)) if row[0] == r.regime]
        assert matches, (parameter, r.value, r.regime)
        _, I, p0, p1 = matches[0]
        assert close(r.I, I) and close(r.p0, p0) and close(r.p1, p1)
        assert r.regime in {g.value for g in Regime}


def test_verify_is_deterministic():
    cfg = ScenarioConfig()
    a = run_verify(cfg, count=12, seed=5)
    b = run_verify(cfg, count=12, seed=5)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["pass_rate"] == 1.0
    assert run_verify(cfg, count=12, seed=6)["results"] != a["results"]


def test_verify_parallel_matches_serial():
    cfg = ScenarioConfig()
    assert run_verify(cfg, count=10, seed=1, jobs=2) == run_verify(cfg, count=10, seed=1)


def test_sweep_spec_values():
    assert list(SweepSpec("L", 0.0, 1.0, 3).values()) == [0.0, 0.5, 1.0]
