import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; reported in the terminal summary."""

    def record(label):
        _CRITERIA[request.node.nodeid] = label

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.nodeid in _CRITERIA:
        _CRITERIA[item.nodeid] = (_CRITERIA[item.nodeid], report.passed)


def pytest_terminal_summary(terminalreporter):
    rows = [v for v in _CRITERIA.values() if isinstance(v, tuple)]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in rows:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
