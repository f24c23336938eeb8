from collections import OrderedDict

import pytest

# criterion number -> [title, passed, failed]
_CRITERIA: "OrderedDict[int, list]" = OrderedDict()
_NODE_CRITERION: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, title = mark.args
        _CRITERIA.setdefault(number, [title, 0, 0])
        _NODE_CRITERION[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _NODE_CRITERION.get(report.nodeid)
    if number is None:
        return
    entry = _CRITERIA[number]
    if report.failed:
        entry[2] += 1
    elif report.when == "call" and report.passed:
        entry[1] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, failed = _CRITERIA[number]
        status = "PASS" if passed and not failed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title} ({passed} passed, {failed} failed)")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240607)
