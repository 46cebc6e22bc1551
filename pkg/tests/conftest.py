import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(rng, d, complex_=True):
    g = rng.normal(size=(d, d))
    if complex_:
        g = g + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_psd(rng, d, rank=None, complex_=True):
    k = rank or d
    g = rng.normal(size=(d, k))
    if complex_:
        g = g + 1j * rng.normal(size=(d, k))
    return g @ g.conj().T


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
