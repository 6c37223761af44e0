import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qwthermo.errors import InvalidInputError, UndefinedEnergiesError
from qwthermo.grover import diabolical_lambdas
from qwthermo.thermo import (
    as_spectrum,
    bloch_average_lambdas,
    energy_levels,
    entropy,
    helmholtz,
    partition_function,
    temperature,
    thermo_report,
)

LN2 = math.log(2)


@st.composite
def spectra(draw, min_size=2, max_size=8):
    n = draw(st.integers(min_size, max_size))
    w = np.array(draw(st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n)))
    return w / w.sum()


def test_temperature_example():
    assert temperature([0.2, 0.2, 0.2, 0.4]) == pytest.approx(2 / LN2, rel=1e-14)
    assert temperature([0.4, 0.2, 0.2, 0.2]) == temperature([0.2, 0.2, 0.2, 0.4])


def test_energy_example():
    eps = energy_levels([1 / 8, 1 / 8, 1 / 4, 1 / 2])
    assert np.allclose(eps, [1, 1, 0, -1], atol=1e-15)


def test_report_example():
    r = thermo_report([1 / 2, 1 / 4, 1 / 8, 1 / 8])
    assert r.T == pytest.approx(1 / LN2)
    assert r.Z == pytest.approx(4.0, rel=1e-14)
    assert r.S == pytest.approx(1.75 * LN2, rel=1e-14)
    assert r.csv_header()[:5] == ["lambda_1", "lambda_2", "lambda_3", "lambda_4", "T"]
    assert len(r.csv_values()) == len(r.csv_header())


def test_uniform_sentinels():
    r = thermo_report(np.full(4, 0.25))
    assert r.T == math.inf and r.beta == 0.0
    assert np.all(r.epsilons == 0) and r.Z == 4.0 and r.U == 0.0 and r.A == -math.inf
    assert r.S == pytest.approx(math.log(4))
    assert temperature(np.full(4, 0.25) + np.array([1e-12, -1e-12, 0, 0])) == math.inf
    with pytest.raises(UndefinedEnergiesError):
        energy_levels(np.full(4, 0.25))
    assert helmholtz(4.0, 0.0) == -math.inf


def test_zero_temperature_sentinels():
    r = thermo_report([0.0, 0.5, 0.25, 0.25])
    assert r.T == 0.0 and r.beta == math.inf
    assert np.all(np.isnan(r.epsilons)) and math.isnan(r.Z) and math.isnan(r.A) and math.isnan(r.U)
    assert r.S == pytest.approx(1.5 * LN2)
    assert temperature([1.0, 0.0, 0.0, 0.0]) == 0.0
    assert temperature([1e-12, 0.5, 0.5 - 1e-12]) == 0.0
    with pytest.raises(UndefinedEnergiesError):
        energy_levels([0.0, 0.5, 0.5])


def test_spectrum_validation():
    for bad in ([], [0.5, 0.6], [1.2, -0.2], [np.nan, 1.0]):
        with pytest.raises(InvalidInputError):
            as_spectrum(bad)
    assert np.array_equal(as_spectrum([0.7, -1e-12, 0.3]), [0.0, 0.3, 0.7])


@settings(max_examples=200, deadline=None)
@given(spectra())
def test_canonical_identities(lam):
    lam = np.sort(lam)
    assume(lam[-1] - lam[0] > 1e-6)
    r = thermo_report(lam)
    assert r.T > 0 and np.isfinite(r.T)
    assert r.epsilons[0] == 1.0 and r.epsilons[-1] == -1.0
    assert np.all(np.diff(r.epsilons) <= 1e-12)
    assert np.allclose(np.exp(-r.beta * r.epsilons) / r.Z, r.lambdas, rtol=1e-10, atol=0)
    assert r.S == pytest.approx(r.beta * (r.U - r.A), rel=1e-9, abs=1e-12)
    assert -1 <= r.U <= 1
    assert 0 <= r.S <= math.log(lam.size) + 1e-12


@settings(max_examples=100, deadline=None)
@given(spectra(), st.randoms(use_true_random=False))
def test_permutation_invariance(lam, rnd):
    perm = list(range(lam.size))
    rnd.shuffle(perm)
    assert temperature(lam[perm]) == temperature(lam)
    assert entropy(lam[perm]) == pytest.approx(entropy(lam), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(spectra(), st.floats(0.01, 100.0))
def test_boltzmann_is_self_consistent(lam, t):
    # a Gibbs state built from eps and T reproduces T
    eps = np.linspace(1, -1, lam.size)
    w = np.exp(-eps / t)
    z = partition_function(eps, 1 / t)
    p = w / z
    # levels below the zero threshold are snapped to 0 and give T = 0
    assume(p[0] > 1e-9 and p[-1] - p[0] > 1e-8)
    assert temperature(p) == pytest.approx(t, rel=1e-9)


def test_bloch_average_diabolical():
    avg, report = bloch_average_lambdas(lambda g, f: diabolical_lambdas(g, f, np.pi), 32)
    assert avg.sum() == pytest.approx(1.0, abs=1e-12)
    assert avg[0] == pytest.approx(0.5, abs=1e-3)
    assert avg[2] == pytest.approx(avg[3], abs=1e-12)
    assert report.T > 0


def test_bloch_average_constant_sampler():
    lam = np.array([0.1, 0.2, 0.3, 0.4])
    avg, report = bloch_average_lambdas(lambda g, f: lam, 8)
    assert np.allclose(avg, lam, atol=1e-15)
    assert report.T == pytest.approx(temperature(lam))
    with pytest.raises(InvalidInputError):
        bloch_average_lambdas(lambda g, f: lam, 3)
