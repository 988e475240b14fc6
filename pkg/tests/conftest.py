"""Shared pytest plumbing.

Collects the one-line verdicts emitted by the acceptance tests and replays
them in the terminal summary, where output capturing cannot swallow them.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
