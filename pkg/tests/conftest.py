import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ORACLES = Path(__file__).parent / "oracles" / "oracles.json"

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def oracles():
    with open(ORACLES) as fh:
        return json.load(fh)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
