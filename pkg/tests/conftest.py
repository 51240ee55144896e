"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_outcomes: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            item.user_properties.append(("criterion", marker.kwargs["criterion"]))
            item.user_properties.append(("title", marker.kwargs.get("title", "")))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    entry = _outcomes.setdefault(props["criterion"], {"title": props["title"], "failed": False, "seen": False})
    if report.failed:
        entry["failed"] = True
    if report.when == "call" or report.skipped:
        entry["seen"] = True


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        status = "FAIL" if entry["failed"] or not entry["seen"] else "PASS"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {entry['title']}")
