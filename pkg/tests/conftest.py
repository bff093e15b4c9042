"""Shared fixtures plus a terminal summary with one line per acceptance criterion."""

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    k, title = mark.args
    entry = _CRITERIA.setdefault(k, {"title": title, "passed": True, "failed": []})
    if rep.failed:
        entry["passed"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        e = _CRITERIA[k]
        status = "PASS" if e["passed"] else "FAIL"
        extra = "" if e["passed"] else f"  (failing: {', '.join(e['failed'])})"
        tr.write_line(f"criterion {k}: {status}  {e['title']}{extra}")
