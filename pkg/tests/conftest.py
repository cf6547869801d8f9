import numpy as np
import pytest

from torusns.spectral import lattice, random_vector

ACCEPTANCE = {}


def record(n, passed, detail):
    """Store one acceptance outcome; the summary hook prints them in order."""
    ACCEPTANCE[n] = (passed, detail)
    line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def solenoidal(rng):
    def make(n=2, m=3, decay=1.0):
        return random_vector(lattice(n, m), rng, decay=decay, zero_mean=True, div_free=True)
    return make
