import pytest

from datadividend import BreachModel, GameParams

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_params(**kw) -> GameParams:
    base = dict(k=10, S=10.0, F=100.0, V=20.0, W=30.0, L=50.0, alpha=0.5, revenue_high=500.0, revenue_low=300.0)
    base.update(kw)
    return GameParams(**base)


@pytest.fixture
def exp_model():
    return BreachModel.exponential(0.5, 0.1)


@pytest.fixture
def params():
    return make_params
