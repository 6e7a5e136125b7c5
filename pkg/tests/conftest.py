import numpy as np
import pytest
from hypothesis import settings

from cases import convection_diffusion, scaled_laplacian
from fracdtn.operator import MeasureSpaceModel

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def lap32():
    return scaled_laplacian()


@pytest.fixture(scope="session")
def cd16():
    return convection_diffusion()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit2():
    return MeasureSpaceModel.unit(2)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def _report(k, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
