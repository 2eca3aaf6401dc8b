import numpy as np
import pytest

ADMISSIBLE = ["-1", "-1/2", "-1/3", "2", "1", "2/3"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_disk_matrix(rng, n):
    """Complex entries uniform in the closed unit disk."""
    r = np.sqrt(rng.random((n, n)))
    t = rng.random((n, n)) * 2 * np.pi
    return r * np.exp(1j * t)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
