import sys
from pathlib import Path

import pytest

# shared helpers (oracles, scenarios) live next to the tests
sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): ties a test to one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        report.acceptance_name = marker.args[0]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, word in (("passed", "PASS"), ("failed", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            name = getattr(report, "acceptance_name", None)
            if name:
                lines.append((name, word))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, word in sorted(lines):
        terminalreporter.write_line(f"{word}: {name}")
