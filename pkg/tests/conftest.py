import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def scenario_factory():
    from iaeb.scenario import validate_scenario

    def make(ego_kmh=60, target_kmh=60, **kw):
        data = {"ego": {"speed_kmh": ego_kmh}, "target": {"speed_kmh": target_kmh}}
        for key, value in kw.items():
            node = data
            *head, last = key.split("__")
            for part in head:
                node = node.setdefault(part, {})
            node[last] = value
        return validate_scenario(data)

    return make
