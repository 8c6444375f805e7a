import pytest

from hdlss_cca.harness import GridConfig, run_grid

SEED = 20240501


@pytest.fixture(scope="session")
def reference_grid():
    """The full 2 x 2 x 2 simulation grid, 100 reps per cell, run once single-threaded."""
    return run_grid(GridConfig(master_seed=SEED), threads=1)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for report in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", []):
        if report.when != "call":
            continue
        for key, value in report.user_properties:
            if key == "acceptance":
                lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
