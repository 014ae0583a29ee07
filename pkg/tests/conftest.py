import pytest
from hypothesis import settings

from ccball import Profile, ProfilePair

settings.register_profile("ccball", max_examples=40, deadline=None)
settings.load_profile("ccball")

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def ee():
    """f = exp(-1/x^2), g = exp(-2/x^2)."""
    return ProfilePair(Profile.exp_inverse(1, 2), Profile.exp_inverse(2, 2))


@pytest.fixture(scope="session")
def ff():
    """f = g = exp(-1/x^2)."""
    return ProfilePair(Profile.exp_inverse(1, 2), Profile.exp_inverse(1, 2))


@pytest.fixture(scope="session")
def lin():
    """f = g = x."""
    return ProfilePair(Profile.power(1), Profile.power(1))


@pytest.fixture(scope="session")
def pw12():
    """f = x, g = x^2."""
    return ProfilePair(Profile.power(1), Profile.power(2))
