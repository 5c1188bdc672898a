"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

import pytest

_RESULTS: dict[str, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Attach a measured-value summary to the current acceptance test."""
    notes: list[str] = []
    request.node.user_properties.append(("criterion_notes", notes))
    return notes


def pytest_runtest_logreport(report):
    crit = next((v for k, v in report.user_properties if k == "criterion_id"), None)
    if crit is None:
        return
    notes = next((v for k, v in report.user_properties if k == "criterion_notes"), [])
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.skipped:
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
            outcome = "SKIP"
            notes = [reason.replace("Skipped: ", "")]
        else:
            outcome = "PASS" if report.passed else "FAIL"
        _RESULTS[crit] = (outcome, "; ".join(notes))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None and m.args:
            item.user_properties.append(("criterion_id", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_RESULTS, key=lambda c: int(c.split()[0])):
        outcome, note = _RESULTS[crit]
        tr.write_line(f"[{outcome}] criterion {crit}" + (f" -- {note}" if note else ""))
