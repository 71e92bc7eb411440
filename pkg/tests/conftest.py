import math

import numpy as np
import pytest

from weakswap.construction import BasisParams, basis_vectors


def state_in_basis(basis: BasisParams, alpha_sq: float, phase: float = 0.0) -> np.ndarray:
    b0, b1 = basis_vectors(basis)
    return math.sqrt(alpha_sq) * b0 + np.exp(1j * phase) * math.sqrt(1.0 - alpha_sq) * b1


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
