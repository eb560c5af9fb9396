"""Shared pytest plumbing: a one-line verdict per acceptance criterion."""

import re

import pytest

# criterion number -> detail string recorded by the passing test
_DETAILS: dict[int, str] = {}
# criterion number -> pytest outcome ("passed"/"failed"/"skipped")
_OUTCOMES: dict[int, str] = {}

_NAME_RE = re.compile(r"test_criterion_(\d+)")


@pytest.fixture(scope="session")
def acceptance_record():
    """Lets an acceptance test attach a measurement summary to its verdict."""

    def record(criterion: int, detail: str) -> None:
        _DETAILS[int(criterion)] = detail

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    match = _NAME_RE.match(item.name)
    if match and report.when == "call":
        _OUTCOMES[int(match.group(1))] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        status = "PASS" if _OUTCOMES[n] == "passed" else _OUTCOMES[n].upper()
        detail = _DETAILS.get(n, "")
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"criterion {n}: {status}{suffix}")
