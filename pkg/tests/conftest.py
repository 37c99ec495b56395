import numpy as np
import pytest

from spatialssa.randoms import random_density, random_pure

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_matrix(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def rand_herm(rng, d):
    g = rand_matrix(rng, d)
    return (g + g.conj().T) / 2


def rand_density(rng, d, rank=None):
    return random_density(d, rank, rng)


def rand_vec(rng, d):
    return random_pure(d, rng)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
