import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "gap example: private 1, public 2/(n+1), n = 2..8, < 5 s each",
    2: "column generation equals enumeration on 50 random instances",
    3: "independent scheme >= (1-1/e) OPT and equals the grid optimum",
    4: "continuous greedy >= (1-1/e) relaxation optimum - eps",
    5: "every emitted scheme is persuasive at 1e-7",
    6: "correlation gap <= e/(e-1); singleton construction at n=5",
    7: "lower-bound family: n/(m+1) private, 1/(m+1) oblivious",
    8: "estimator coverage and gradient check",
}

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call":
        _results[n] = _results.get(n, True) and rep.passed
    elif rep.failed or rep.skipped:
        _results[n] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, desc in CRITERIA.items():
        if n in _results:
            status = "PASS" if _results[n] else "FAIL"
            terminalreporter.write_line(f"criterion {n}: {status}  {desc}")
