"""
Canonical-ensemble reading of an asymptotic coin spectrum.

Units: Boltzmann constant and the energy scale are both 1, entropies are in
nats. Spectra are handled in ascending order, so Lambda_1 is the least
probable level and carries the highest energy, eps_1 = +1, while
eps_2N = -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInputError, UndefinedEnergiesError

__all__ = [
    "SPECTRUM_TOL",
    "ThermoReport",
    "as_spectrum",
    "temperature",
    "energy_levels",
    "partition_function",
    "helmholtz",
    "internal_energy",
    "entropy",
    "thermo_report",
    "bloch_average_lambdas",
]

# values within this distance of 0 count as 0; spectra whose spread is below
# it count as uniform
SPECTRUM_TOL = 1e-10


def as_spectrum(lambdas: ArrayLike) -> NDArray[np.float64]:
    """Sorted, clipped copy of a probability spectrum; checks it sums to 1."""
    lam = np.sort(np.asarray(lambdas, dtype=np.float64).ravel())
    if lam.size == 0 or not np.all(np.isfinite(lam)):
        raise InvalidInputError("spectrum must be a non-empty finite vector")
    if lam[0] < -SPECTRUM_TOL:
        raise InvalidInputError(f"spectrum has a negative entry {lam[0]:.3e}")
    if abs(lam.sum() - 1.0) > SPECTRUM_TOL:
        raise InvalidInputError(f"spectrum sums to {lam.sum():.12f}, not 1")
    lam[np.abs(lam) < SPECTRUM_TOL] = 0.0
    return lam


def _is_uniform(lam: NDArray[np.float64]) -> bool:
    return lam[-1] - lam[0] <= SPECTRUM_TOL


def temperature(lambdas: ArrayLike) -> float:
    """
    Entanglement temperature ``2 / ln(Lambda_max / Lambda_min)``.

    Returns 0 when the smallest level is empty and +inf for a uniform
    spectrum.
    """
    lam = as_spectrum(lambdas)
    if _is_uniform(lam):
        return math.inf
    if lam[0] == 0.0:
        return 0.0
    return 2.0 / math.log(lam[-1] / lam[0])


def energy_levels(lambdas: ArrayLike) -> NDArray[np.float64]:
    """
    ``eps_s = 1 - 2 ln(Lambda_s/Lambda_1) / ln(Lambda_2N/Lambda_1)`` for the
    ascending spectrum.

    Raises
    ------
    UndefinedEnergiesError
        If some level is empty or the spectrum is uniform.
    """
    lam = as_spectrum(lambdas)
    if lam[0] == 0.0:
        raise UndefinedEnergiesError("energies are undefined when a level has zero weight (T = 0)")
    if _is_uniform(lam):
        raise UndefinedEnergiesError("energies are undefined for a uniform spectrum (T = inf)")
    logs = np.log(lam / lam[0])
    eps = 1.0 - 2.0 * logs / logs[-1]
    eps[0], eps[-1] = 1.0, -1.0
    return eps


def partition_function(epsilons: ArrayLike, beta: float) -> float:
    eps = np.asarray(epsilons, dtype=np.float64)
    return float(np.sum(np.exp(-beta * eps)))


def helmholtz(z: float, beta: float) -> float:
    """``A = -ln(Z) / beta``; -inf at infinite temperature."""
    if beta == 0.0:
        return -math.inf
    return -math.log(z) / beta


def internal_energy(lambdas: ArrayLike, epsilons: ArrayLike) -> float:
    """``U = sum_s Lambda_s eps_s``; both vectors in the same (ascending) order."""
    return float(np.dot(np.asarray(lambdas, dtype=np.float64), np.asarray(epsilons, dtype=np.float64)))


def entropy(lambdas: ArrayLike) -> float:
    """Von Neumann entropy ``-sum Lambda ln Lambda`` in nats, with 0 ln 0 = 0."""
    lam = np.asarray(lambdas, dtype=np.float64)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


@dataclass(frozen=True)
class ThermoReport:
    """All canonical quantities derived from one spectrum.

    At T = +inf: eps = 0, Z = 2N, U = 0, A = -inf. At T = 0 the energies, Z,
    A and U are NaN.
    """

    lambdas: NDArray[np.float64]
    T: float
    beta: float
    epsilons: NDArray[np.float64]
    Z: float
    A: float
    U: float
    S: float

    @property
    def size(self) -> int:
        return self.lambdas.size

    def csv_header(self) -> list[str]:
        n = self.size
        return (
            [f"lambda_{i + 1}" for i in range(n)]
            + ["T", "beta"]
            + [f"eps_{i + 1}" for i in range(n)]
            + ["Z", "A", "U", "S"]
        )

    def csv_values(self) -> list[float]:
        return [*self.lambdas, self.T, self.beta, *self.epsilons, self.Z, self.A, self.U, self.S]


def thermo_report(lambdas: ArrayLike) -> ThermoReport:
    lam = as_spectrum(lambdas)
    n = lam.size
    s = entropy(lam)
    t = temperature(lam)
    if math.isinf(t):
        return ThermoReport(lam, t, 0.0, np.zeros(n), float(n), -math.inf, 0.0, s)
    if t == 0.0:
        nan = math.nan
        return ThermoReport(lam, 0.0, math.inf, np.full(n, nan), nan, nan, nan, s)
    beta = 1.0 / t
    eps = energy_levels(lam)
    z = partition_function(eps, beta)
    return ThermoReport(lam, t, beta, eps, z, helmholtz(z, beta), internal_energy(lam, eps), s)


def bloch_average_lambdas(
    sampler: Callable[[float, float], ArrayLike], resolution: int = 32
) -> tuple[NDArray[np.float64], ThermoReport]:
    """
    Average a spectrum over the Bloch sphere with the uniform measure.

    ``sampler(gamma, phi)`` returns the spectrum of the initial coin state at
    that Bloch point, in whatever fixed index order the caller uses; the
    average keeps that order. gamma is sampled at ``resolution`` midpoints with
    weight sin(gamma), phi at ``2 * resolution`` equispaced points. The report
    is built from the averaged spectrum.
    """
    if resolution < 4:
        raise InvalidInputError("resolution must be at least 4")
    gam = np.pi * (np.arange(resolution) + 0.5) / resolution
    phi = 2 * np.pi * np.arange(2 * resolution) / (2 * resolution)
    wg = np.sin(gam)
    wg = wg / (wg.sum() * phi.size)
    acc = None
    for g, w in zip(gam, wg):
        for f in phi:
            lam = w * np.asarray(sampler(float(g), float(f)), dtype=np.float64)
            acc = lam if acc is None else acc + lam
    return acc, thermo_report(acc)
