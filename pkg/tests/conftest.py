from __future__ import annotations

# Scoreboard lines pushed by the acceptance tests; echoed after the run so
# they survive pytest's fd-level capture in every mode.
SCOREBOARD: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if SCOREBOARD:
        terminalreporter.section("acceptance scoreboard")
        for line in SCOREBOARD:
            terminalreporter.write_line(line)
