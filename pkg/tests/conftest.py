import sys

import pytest

from shearspec.profile import parse_profile

COUETTE = ("x2", 1.0)
TANH2 = ("tanh(2*(x2+1))", 2.0)
TANH_HALF = ("tanh(0.5*(x2+1))", 2.0)
CUBIC = ("1 + x2 + ((1+x2)^3)/2", 2.0)
CONCAVE = ("x2 - 0.3*x2^2", 1.0)


@pytest.fixture(scope="session")
def couette():
    return parse_profile(*COUETTE)


@pytest.fixture(scope="session")
def tanh2():
    return parse_profile(*TANH2)


@pytest.fixture(scope="session")
def tanh_half():
    return parse_profile(*TANH_HALF)


@pytest.fixture(scope="session")
def cubic():
    return parse_profile(*CUBIC)


@pytest.fixture(scope="session")
def concave():
    return parse_profile(*CONCAVE)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = sorted(getattr(mod, "RESULTS", []), key=lambda s: int(s.split()[2]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
