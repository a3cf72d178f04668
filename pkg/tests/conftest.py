"""Shared pytest plumbing for the suite.

Collects one summary line per end-to-end check (see test_acceptance.py) and
prints the block at the end of the run so pass/fail status is visible even
when pytest captures stdout.
"""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Return a recorder: record(num, name, passed, detail, elapsed)."""

    def record(num, name, passed, detail, elapsed):
        tag = "PASS" if passed else "FAIL"
        line = f"[{tag}] {num:02d} {name}: {detail} ({elapsed:.2f}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "end-to-end check summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
