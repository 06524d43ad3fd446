import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from holoconf import catalog

settings.register_profile(
    "holoconf", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("holoconf")


@pytest.fixture(scope="session")
def metrics():
    return {man.name: man.to_metric() for man in catalog.catalog()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def near(m, rng, radius=0.15):
    """A random complex point near the basepoint of ``m``."""
    return m.basepoint + radius * (rng.standard_normal(m.n) + 0.5j * rng.standard_normal(m.n))


ACCEPTANCE = []  # (criterion number, passed, detail), filled by test_acceptance


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append((number, ok, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
