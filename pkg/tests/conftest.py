from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_")
_outcomes: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        results = _outcomes.get(num)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        detail = f"{sum(results)}/{len(results)} checks" if results else ""
        terminalreporter.write_line(f"criterion {num} {status:<7} {CRITERIA[num]} {detail}".rstrip())
