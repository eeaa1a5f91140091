import numpy as np
import pytest
from scipy import integrate

from edpconv.core import PeriodicCoefficient

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cosine():
    return PeriodicCoefficient.cosine(0.8, 1.0)


@pytest.fixture(scope="session")
def cosine_moments_ref():
    """Moments of 1 + 0.8 cos(2 pi y) from scipy quad (independent of the package)."""
    mu = lambda y: 1 + 0.8 * np.cos(2 * np.pi * y)  # noqa: E731
    mean = integrate.quad(mu, 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    half = integrate.quad(lambda y: np.sqrt(mu(y)), 0, 1, epsabs=1e-14, epsrel=1e-13)[0] ** 2
    return mean, half, 1.8
