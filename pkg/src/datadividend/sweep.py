"""Scenario configs, single solves, parameter sweeps and verification batches."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Optional

import numpy as np

from .breach import BreachModel, Family
from .game import GameParams, SharingLevel, effective_valuation
from .instances import random_instances
from .oracle import CEILING_FRACTION, OracleConfig, verify
from .solver import Equilibrium, candidate_investments, regime_thresholds, solve_equilibrium

PARAM_FIELDS = ("k", "S", "F", "V", "W", "L", "alpha", "revenue_high", "revenue_low")
MODEL_FIELDS = ("family", "beta", "rate", "scale")
SWEEPABLE = ("L", "F", "V", "W", "alpha", "k", "beta", "rate")

SWEEP_COLUMNS = (
    "value",
    "level",
    "regime",
    "I",
    "p0",
    "p1",
    "platform_utility",
    "user_utility",
    "valuation",
    "threshold_pay",
    "threshold_nopay",
    "transition",
)


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class ScenarioConfig:
    params: Optional[GameParams] = None
    model: Optional[BreachModel] = None
    oracle: OracleConfig = OracleConfig()
    sweep: Optional[SweepSpec] = None


@dataclass(frozen=True)
class SweepRow:
    value: float
    level: str
    regime: str
    I: float
    p0: float
    p1: float
    platform_utility: float
    user_utility: float
    valuation: float
    threshold_pay: Optional[float]
    threshold_nopay: Optional[float]
    transition: bool

    def as_record(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _section(doc: dict, key: str, allowed: tuple, required: tuple) -> dict:
    section = doc[key]
    if not isinstance(section, dict):
        raise ConfigError(key, "expected an object")
    for name in section:
        if name not in allowed:
            raise ConfigError(f"{key}.{name}", "unknown field")
    for name in required:
        if name not in section:
            raise ConfigError(f"{key}.{name}", "missing required field")
    for name, value in section.items():
        if name == "family":
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}.{name}", f"expected a number, got {value!r}")
    return section


def _build(key: str, ctor: Callable, section: dict, fields_in_order: tuple):
    # Validate one field at a time so the error names the offending path.
    try:
        return ctor(**section)
    except ValueError as exc:
        msg = str(exc)
        for name in fields_in_order:
            if msg.startswith(name + " "):
                raise ConfigError(f"{key}.{name}", msg) from None
        raise ConfigError(key, msg) from None


def _parse_model(section: dict) -> BreachModel:
    family = section["family"]
    valid = [f.value for f in Family]
    if family not in valid:
        raise ConfigError("model.family", f"expected one of {valid}, got {family!r}")
    return _build("model", BreachModel, section, MODEL_FIELDS)


def _parse_sweep(doc: dict, params: Optional[GameParams], model: Optional[BreachModel]) -> SweepSpec:
    section = doc["sweep"]
    if not isinstance(section, dict):
        raise ConfigError("sweep", "expected an object")
    for name in section:
        if name not in ("parameter", "start", "stop", "steps"):
            raise ConfigError(f"sweep.{name}", "unknown field")
    for name in ("parameter", "start", "stop", "steps"):
        if name not in section:
            raise ConfigError(f"sweep.{name}", "missing required field")
    parameter = section["parameter"]
    if parameter not in SWEEPABLE:
        raise ConfigError("sweep.parameter", f"expected one of {list(SWEEPABLE)}, got {parameter!r}")
    for name in ("start", "stop"):
        value = section[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"sweep.{name}", f"expected a finite number, got {value!r}")
    steps = section["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise ConfigError("sweep.steps", f"expected an integer >= 2, got {steps!r}")
    spec = SweepSpec(parameter, float(section["start"]), float(section["stop"]), steps)
    if params is None or model is None:
        raise ConfigError("params" if params is None else "model", "a sweep needs a base instance")
    values = spec.values()
    if parameter == "k" and not np.all(values == np.round(values)):
        raise ConfigError("sweep", "k sweep must land on integers at every step")
    # Every validity domain is an interval, so the end points decide.
    for end, value in (("start", spec.start), ("stop", spec.stop)):
        try:
            apply_parameter(params, model, parameter, value)
        except ValueError as exc:
            raise ConfigError(f"sweep.{end}", f"{parameter}={value!r} out of domain: {exc}") from None
    return spec


def parse_config(document: Any) -> ScenarioConfig:
    """Validate a JSON scenario (text or already-decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"malformed JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("$", "expected a JSON object")
    for key in document:
        if key not in ("params", "model", "oracle", "sweep"):
            raise ConfigError(key, "unknown section")

    params = model = None
    if "params" in document:
        section = _section(document, "params", PARAM_FIELDS, PARAM_FIELDS)
        params = _build("params", GameParams, section, PARAM_FIELDS)
    if "model" in document:
        model_doc = document["model"]
        if not isinstance(model_doc, dict):
            raise ConfigError("model", "expected an object")
        if "family" not in model_doc:
            raise ConfigError("model.family", "missing required field")
        section = _section(document, "model", MODEL_FIELDS, ("family", "beta", "rate"))
        model = _parse_model(section)
    oracle = OracleConfig()
    if "oracle" in document:
        allowed = tuple(OracleConfig().to_dict())
        section = _section(document, "oracle", allowed, ())
        oracle = _build("oracle", OracleConfig, section, allowed)
    sweep = _parse_sweep(document, params, model) if "sweep" in document else None
    return ScenarioConfig(params, model, oracle, sweep)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def _require_instance(cfg: ScenarioConfig) -> tuple[GameParams, BreachModel]:
    if cfg.params is None:
        raise ConfigError("params", "missing required section")
    if cfg.model is None:
        raise ConfigError("model", "missing required section")
    return cfg.params, cfg.model


def apply_parameter(params: GameParams, model: BreachModel, name: str, value: float):
    if name in ("beta", "rate"):
        return params, replace(model, **{name: float(value)})
    if name == "k":
        value = int(round(value))
    return replace(params, **{name: value}), model


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def equilibrium_warnings(eq: Equilibrium, oracle: OracleConfig) -> list:
    warnings = list(eq.warnings)
    if eq.chosen.decision.I >= CEILING_FRACTION * oracle.I_max:
        warnings.append("investment_near_ceiling")
    return warnings


def run_solve(cfg: ScenarioConfig) -> dict:
    params, model = _require_instance(cfg)
    eq = solve_equilibrium(params, model)
    return {
        "params": params.to_dict(),
        "model": model.to_dict(),
        "candidates": candidate_investments(params, model).to_dict(),
        "equilibrium": eq.to_dict(),
        "warnings": equilibrium_warnings(eq, cfg.oracle),
    }


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def sweep_row(params: GameParams, model: BreachModel, value: float, previous: Optional[SweepRow]) -> SweepRow:
    eq = solve_equilibrium(params, model)
    sol = eq.chosen
    d = sol.decision
    t_pay, t_nopay = regime_thresholds(params, model, sol.level)
    transition = previous is not None and (
        previous.level != sol.level.value or previous.regime != sol.regime.value
    )
    return SweepRow(
        value=float(value),
        level=sol.level.value,
        regime=sol.regime.value,
        I=d.I,
        p0=d.p0,
        p1=d.p1,
        platform_utility=float(sol.platform_utility),
        user_utility=float(sol.user_utility),
        valuation=float(effective_valuation(params, model, d.I)),
        threshold_pay=t_pay,
        threshold_nopay=t_nopay,
        transition=transition,
    )


def run_sweep(cfg: ScenarioConfig) -> list[SweepRow]:
    params, model = _require_instance(cfg)
    if cfg.sweep is None:
        raise ConfigError("sweep", "missing required section")
    rows: list[SweepRow] = []
    for value in cfg.sweep.values():
        p, m = apply_parameter(params, model, cfg.sweep.parameter, float(value))
        try:
            rows.append(sweep_row(p, m, value, rows[-1] if rows else None))
        except Exception as exc:
            raise RuntimeError(f"solver failed at {cfg.sweep.parameter}={value!r}: {exc}") from exc
    return rows


def find_transition(
    params: GameParams,
    model: BreachModel,
    parameter: str,
    lo: float,
    hi: float,
    predicate: Callable[[Equilibrium], bool],
    tol: float = 1e-12,
) -> float:
    """Bisect for the parameter value where `predicate` flips between lo and hi."""

    def holds(x):
        p, m = apply_parameter(params, model, parameter, x)
        return predicate(solve_equilibrium(p, m))

    at_lo = holds(lo)
    if holds(hi) == at_lo:
        raise ValueError("predicate does not change over the bracket")
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if holds(mid) == at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(records: list[dict], columns: tuple) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(rec[c]) for c in columns])
    return buf.getvalue()


def rows_to_csv(rows: list[SweepRow]) -> str:
    return to_csv([r.as_record() for r in rows], SWEEP_COLUMNS)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

VERIFY_COLUMNS = ("index", "family", "passed", "utility_rel", "I", "price", "level", "annotations")


def _verify_one(job):
    index, params, model, oracle = job
    report = verify(params, model, oracle)
    price_key = "p1" if "p1" in report.deltas else "p0"
    return {
        "index": index,
        "family": model.family.value,
        "passed": report.passed,
        "utility_rel": report.deltas["utility_rel"],
        "I": report.deltas["I"],
        "price": report.deltas[price_key],
        "level": report.oracle.level.value,
        "annotations": ";".join(report.annotations),
    }


def run_verify(cfg: ScenarioConfig, count: int = 200, seed: int = 0, jobs: int = 1) -> dict:
    """Verify `count` seeded random instances; the summary is seed-deterministic."""
    if count < 1:
        raise ConfigError("instances", "must be >= 1")
    work = [(i, p, m, cfg.oracle) for i, (p, m) in enumerate(random_instances(seed, count))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_verify_one, work, chunksize=8))
    else:
        results = [_verify_one(job) for job in work]
    passed = sum(r["passed"] for r in results)
    return {
        "seed": seed,
        "instances": count,
        "oracle": cfg.oracle.to_dict(),
        "passed": passed,
        "failed": count - passed,
        "pass_rate": passed / count,
        "results": results,
    }
