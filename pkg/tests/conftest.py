"""Shared pytest wiring.

The acceptance tests record one verdict line per criterion; replaying
them after the run keeps the lines visible even when output capture is
on, so any invocation ends with the full pass/fail scorecard.
"""

acceptance_verdicts = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_verdicts:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_verdicts:
            terminalreporter.write_line(line)
