"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import re

_ACCEPTANCE = {}
_NAME = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed or report.skipped:
        prev = _ACCEPTANCE.get(key)
        if prev != "FAIL":
            _ACCEPTANCE[key] = "PASS" if report.passed else (
                "SKIP" if report.skipped else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {num} {name.replace('_', ' ')}: {status}")
