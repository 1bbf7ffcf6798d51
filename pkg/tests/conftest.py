import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# filled by the acceptance suite, one (label, passed, seconds, detail) per criterion
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, secs, detail in sorted(ACCEPTANCE_LINES, key=lambda t: int(t[0].split()[0])):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  ({secs:.3f} s){'  ' + detail if detail else ''}")
