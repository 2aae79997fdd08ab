import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def constants():
    from magneto_spectra.halfline import degennes_constants

    return degennes_constants()


@pytest.fixture(scope="session")
def disk():
    from magneto_spectra.geometry import BoundaryCurve

    return BoundaryCurve.disk()


@pytest.fixture(scope="session")
def const_problem(disk):
    from magneto_spectra import FieldModel, SpectralProblem

    return SpectralProblem(disk, FieldModel("1", disk))


@pytest.fixture(scope="session")
def var_field(disk):
    from magneto_spectra import FieldModel

    return FieldModel("2 - x", disk)


@pytest.fixture(scope="session")
def var_problem(disk, var_field):
    from magneto_spectra import SpectralProblem

    return SpectralProblem(disk, var_field)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
