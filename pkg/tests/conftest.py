"""Collects the per-guarantee result lines from the acceptance suite and
echoes them after the run, so they stay visible even with output capture."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance results")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
