import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Acceptance criteria register their outcome here; the terminal summary
# prints one line per criterion at the end of the session.
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status:<7} {name}")
