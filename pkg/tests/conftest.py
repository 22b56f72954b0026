"""Terminal-summary plumbing for the acceptance verdict lines.

The acceptance tests register one PASS/FAIL line each; printing them from
inside a test would be swallowed by capture, so they are replayed as a
summary section after the run.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance report")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
