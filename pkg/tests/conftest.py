import numpy as np
import pytest

from activeflux.core import SolutionState


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_state(rng):
    def make(n=32):
        return SolutionState(rng.standard_normal(n), rng.standard_normal(n))

    return make


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    The test sets ``record.detail`` as it measures; the line is written
    whether the assertions hold or not.
    """
    number, title = request.node.get_closest_marker("criterion").args

    class Record:
        detail = ""

    record = Record()
    yield record
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    line = f"[{'FAIL' if failed else 'PASS'}] criterion {number:>2}: {title}"
    if record.detail:
        line += f" ({record.detail})"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item.rep_call = report


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
