"""Shared pytest plumbing: the acceptance suite's pass/fail summary block."""

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def announce(request):
    """Record one human-readable [PASS] line for the terminal summary."""

    def _announce(line: str) -> None:
        request.config._acceptance_lines.append(f"[PASS] {line}")

    return _announce


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = list(getattr(config, "_acceptance_lines", []))
    for report in terminalreporter.stats.get("failed", []):
        if "test_acceptance" in report.nodeid:
            name = report.nodeid.split("::")[-1].removeprefix("test_")
            lines.append(f"[FAIL] {name}")
    if lines:
        terminalreporter.section("acceptance checks")
        for line in sorted(lines, key=lambda s: s.split()[1]):
            terminalreporter.write_line(line)
