import time

import pytest

_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Time a criterion body and record its outcome under the test's name."""
    start = time.perf_counter()
    yield
    _RESULTS.setdefault(request.node.nodeid, {})["elapsed"] = time.perf_counter() - start


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    entry = _RESULTS.setdefault(item.nodeid, {})
    entry["label"] = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        entry["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    rows = [v for v in _RESULTS.values() if "label" in v and "passed" in v]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for v in sorted(rows, key=lambda r: int(r["label"].split(".")[0])):
        status = "PASS" if v["passed"] else "FAIL"
        terminalreporter.write_line(f"{status}  {v['label']}  ({v.get('elapsed', 0.0):.2f} s)")
