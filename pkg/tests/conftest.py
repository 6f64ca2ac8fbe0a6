import pytest

from ilwsse.acceptance import cached_data, reference_profile


@pytest.fixture(scope="session")
def sech2():
    return reference_profile()


@pytest.fixture(scope="session")
def data():
    """Modified scattering data for sech^2 at delta = 0.5, keyed by N."""
    return lambda N, delta=0.5: cached_data(N, delta)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
