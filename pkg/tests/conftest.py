import random
import time

import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return random.Random(20261019)


@pytest.fixture
def criterion(request):
    """Time a block and record one PASS/FAIL line for the terminal summary."""

    class _Crit:
        def __init__(self):
            self.name = None
            self.limit = None
            self.start = None

        def __call__(self, name: str, limit: float):
            self.name, self.limit = name, limit
            self.start = time.perf_counter()
            return self

        def elapsed(self) -> float:
            return time.perf_counter() - self.start

    crit = _Crit()
    yield crit
    if crit.name is None:
        return
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"[{'PASS' if ok else 'FAIL'}] {crit.name} ({crit.elapsed():.2f}s, limit {crit.limit:g}s)"
    _ACCEPTANCE_LINES.append(line)
    print("\n" + line)


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

