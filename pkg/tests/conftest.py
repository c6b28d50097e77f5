import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("unibw", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("unibw")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line per acceptance criterion."""
    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
