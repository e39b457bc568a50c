from pathlib import Path

import pytest

from jetcanon import Bundle, load_manifest

MANIFESTS = Path(__file__).resolve().parent.parent / "manifests"


def manifest(name):
    return load_manifest(MANIFESTS / f"{name}.jv")


@pytest.fixture
def kdv():
    return Bundle(["x"], ["u"], ["k", "t"], positive=["k"])


@pytest.fixture
def plane():
    return Bundle(["x", "y"], ["u"], ["c", "s"])


@pytest.fixture
def pair():
    return Bundle(["x"], ["u", "v"], ["t"])


# -- acceptance reporting -----------------------------------------------------
# tests marked ``criterion(n, title)`` are grouped; one PASS/FAIL line per group

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion group")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "passed": []})
    (entry["failed"] if rep.failed else entry["passed"]).append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "FAIL" if e["failed"] else "PASS"
        tr.write_line(f"{status}  {number:>2}  {e['title']}")
        for name in e["failed"]:
            tr.write_line(f"          failing check: {name}")
