import time

import numpy as np
import pytest

from qwthermo import asymptotics as asy
from qwthermo.grover import grover_coin
from qwthermo.initial import BlochPoint, SeparableGaussianIC, gaussian_position_amplitudes
from qwthermo.lattice import reduced_density, trajectory


@pytest.fixture(scope="session")
def grover():
    return grover_coin()


@pytest.fixture(scope="session")
def grid128():
    return asy.QuadratureGrid(128)


@pytest.fixture(scope="session")
def grid256():
    return asy.QuadratureGrid(256)


@pytest.fixture(scope="session")
def field128(grover, grid128):
    return asy.spectral_field(grover, grid128)


@pytest.fixture(scope="session")
def field256(grover, grid256):
    return asy.spectral_field(grover, grid256)


@pytest.fixture(scope="session")
def sigma6_ic():
    return SeparableGaussianIC(6.0, (0.0, 0.0), BlochPoint(0.0, 0.0))


@pytest.fixture(scope="session")
def sigma6_run(grover, sigma6_ic):
    """rho_c(t) for t = 0..400 of the sigma = 6 packet, plus wall time."""
    t0 = time.perf_counter()
    rhos = [reduced_density(st) for _, st in trajectory(gaussian_position_amplitudes(sigma6_ic), grover, 400)]
    return np.array(rhos), time.perf_counter() - t0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; the lines are repeated in the terminal summary."""

    def record(number, title, passed, detail, seconds):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail} ({seconds:.2f} s)"
        request.config.stash[_ACCEPTANCE].append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
