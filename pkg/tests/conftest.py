import numpy as np
import pytest

from toposval.linalg import DensityMatrix, Projector
from toposval.sampling import diag_plus_trivial, fix_a

criterion_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixa():
    return fix_a()


@pytest.fixture(scope="session")
def dim2_poset():
    return diag_plus_trivial(2)


@pytest.fixture
def rho_e0():
    return DensityMatrix(np.diag([1.0, 0, 0]))


@pytest.fixture
def rho_plus():
    v = np.array([1, 1]) / np.sqrt(2)
    return DensityMatrix(np.outer(v, v.conj()))


def diag_proj(*bits):
    return Projector(np.diag([float(b) for b in bits]).astype(complex))
