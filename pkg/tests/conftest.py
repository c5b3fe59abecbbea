"""Shared pytest plumbing.

The acceptance tests record one PASS/FAIL line per criterion; the hook
below replays them in the terminal summary so the verdicts are visible
even when pytest captures stdout.
"""

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    status = "PASS" if passed else "FAIL"
    line = f"{status} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
