"""
Coin density matrix in the spectral representation and its long-time limit.

Integrals over the Brillouin zone are discretized with the midpoint rule on
M^N nodes. For M divisible by 4 no node falls on k = 0, on k_alpha = +-pi,
or on the degeneracy points of the Grover walk. Integrands that are
trigonometric polynomials of degree below M are integrated exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coin import CoinMatrix, cluster_labels, eigensystem_batch, grid_nodes_1d, momentum_coin
from .errors import InvalidInputError, NumericalError
from .grover import align_grover_gauge, order_grover_branches
from .initial import (
    BlochPoint,
    NonSeparableIC,
    SeparableGaussianIC,
    chi_vector,
    gaussian_momentum_profile,
    nonseparable_coefficients,
    resolve_ordering,
)
from .thermo import SPECTRUM_TOL, temperature

__all__ = [
    "QuadratureGrid",
    "LambdaSpectrum",
    "SpectralField",
    "spectral_field",
    "momentum_weights",
    "rho_c_at_time",
    "rho_c_time_average",
    "asymptotic_density",
    "lambda_spectrum",
    "nonseparable_I_closed_density",
    "nonseparable_I_printed_lambdas",
    "nonseparable_I_printed_temperature",
    "nonseparable_I_temperature",
    "FamilyITemperature",
    "family_sampler",
]

InitialCondition = Union[SeparableGaussianIC, NonSeparableIC]
CHUNK = 8192


@dataclass(frozen=True)
class QuadratureGrid:
    """Midpoint grid with ``m`` nodes per axis and weight ``1/m^N`` per node."""

    m: int
    dim_n: int = 2

    def __post_init__(self) -> None:
        if self.m <= 0 or self.m % 4:
            raise InvalidInputError(f"grid size must be a positive multiple of 4, got {self.m}")
        if self.dim_n < 1:
            raise InvalidInputError("dimension must be positive")

    @property
    def nodes_1d(self) -> NDArray[np.float64]:
        return grid_nodes_1d(self.m)

    @property
    def size(self) -> int:
        return self.m**self.dim_n

    @property
    def weight(self) -> float:
        return 1.0 / self.size

    @property
    def nodes(self) -> NDArray[np.float64]:
        """All nodes, shape (m^N, N), last axis varying fastest."""
        axes = np.meshgrid(*([self.nodes_1d] * self.dim_n), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)


@dataclass(frozen=True)
class LambdaSpectrum:
    values: NDArray[np.float64]
    basis: Optional[NDArray[np.complex128]] = None

    def __post_init__(self) -> None:
        if abs(self.values.sum() - 1.0) > SPECTRUM_TOL:
            raise NumericalError(f"spectrum sums to {self.values.sum():.12f}")
        if np.any(np.diff(self.values) < 0):
            raise InvalidInputError("spectrum must be ascending")


@dataclass(frozen=True)
class SpectralField:
    """Eigen-decomposition of ``C_k`` on every node of a grid, in a fixed branch order."""

    grid: QuadratureGrid
    ordering: str
    k: NDArray[np.float64]
    phases: NDArray[np.float64]
    vectors: NDArray[np.complex128]

    @cached_property
    def clusters(self) -> NDArray[np.int64]:
        return cluster_labels(np.exp(-1j * self.phases))


def _field_chunk(coin: CoinMatrix, k: NDArray[np.float64], ordering: str) -> tuple[NDArray, NDArray]:
    phases, vectors = eigensystem_batch(momentum_coin(coin, k))
    if ordering == "grover":
        phases, vectors = order_grover_branches(phases, vectors, k)
        vectors = align_grover_gauge(vectors, k)
    return phases, vectors


def spectral_field(coin: CoinMatrix, grid: QuadratureGrid, ordering: str = "auto", workers: int = 1) -> SpectralField:
    """
    Diagonalize ``C_k`` on all grid nodes.

    Nodes are processed in fixed-size chunks; ``workers`` threads only change
    scheduling, never the result.
    """
    if coin.dim_n != grid.dim_n:
        raise InvalidInputError("coin and grid dimensions differ")
    order = resolve_ordering(coin, ordering)
    k = grid.nodes
    chunks = [k[i : i + CHUNK] for i in range(0, k.shape[0], CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _field_chunk(coin, c, order), chunks))
    else:
        parts = [_field_chunk(coin, c, order) for c in chunks]
    phases = np.concatenate([p[0] for p in parts])
    vectors = np.concatenate([p[1] for p in parts])
    return SpectralField(grid, order, k, phases, vectors)


def _get_field(coin: CoinMatrix, grid: QuadratureGrid, ordering: str, field: SpectralField | None) -> SpectralField:
    if field is None:
        return spectral_field(coin, grid, ordering)
    if field.grid != grid:
        raise InvalidInputError("precomputed field belongs to another grid")
    return field


def momentum_weights(ic: InitialCondition, field: SpectralField) -> NDArray[np.complex128]:
    """Weights ``f_s(k) = <phi_s(k)|psi_k>`` on every node, shape (n, 2N)."""
    size = field.vectors.shape[-1]
    if isinstance(ic, NonSeparableIC):
        c = nonseparable_coefficients(ic.family, ic.bloch, size)
        return np.broadcast_to(c, field.phases.shape).copy()
    if isinstance(ic, SeparableGaussianIC):
        if ic.is_delta_limit:
            raise InvalidInputError("the sigma -> inf limit is evaluated by delta_limit_lambdas, not by quadrature")
        if ic.dim_n != field.grid.dim_n:
            raise InvalidInputError("initial condition and grid dimensions differ")
        g = gaussian_momentum_profile(ic.sigma, ic.k0, field.k)
        chi = chi_vector(ic.dim_n, ic.bloch)
        return g[:, None] * (np.conj(np.swapaxes(field.vectors, 1, 2)) @ chi)
    raise InvalidInputError(f"unsupported initial condition {type(ic).__name__}")


def _hermitize(rho: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return 0.5 * (rho + rho.conj().T)


def asymptotic_density(
    ic: InitialCondition,
    coin: CoinMatrix,
    grid: QuadratureGrid,
    ordering: str = "auto",
    field: SpectralField | None = None,
) -> NDArray[np.complex128]:
    """
    Long-time limit ``int dk/(2pi)^N sum_s |f_s|^2 |phi_s><phi_s|``.

    On nodes where eigenvalues coincide the cluster contributes
    ``P_c psi_k psi_k^dagger P_c``, which does not depend on the basis
    chosen inside the cluster.
    """
    fld = _get_field(coin, grid, ordering, field)
    f = momentum_weights(ic, fld)
    y = fld.vectors * f[:, None, :]
    labels = fld.clusters
    multi = np.flatnonzero(np.any(labels != np.arange(labels.shape[1]), axis=1))
    for i in multi:
        merged = np.zeros_like(y[i])
        for c in np.unique(labels[i]):
            merged[:, c] = y[i][:, labels[i] == c].sum(axis=1)
        y[i] = merged
    rho = np.einsum("nis,njs->ij", y, y.conj()) * grid.weight
    return _hermitize(rho)


def rho_c_at_time(
    ic: InitialCondition,
    coin: CoinMatrix,
    grid: QuadratureGrid,
    t: int,
    ordering: str = "auto",
    field: SpectralField | None = None,
) -> NDArray[np.complex128]:
    """Coin density matrix at time ``t`` including all oscillating cross terms."""
    if t < 0:
        raise InvalidInputError("time must be non-negative")
    fld = _get_field(coin, grid, ordering, field)
    f = momentum_weights(ic, fld) * np.exp(-1j * fld.phases * t)
    psi = np.einsum("nis,ns->ni", fld.vectors, f)
    return _hermitize(psi.T @ psi.conj() * grid.weight)


def rho_c_time_average(
    ic: InitialCondition,
    coin: CoinMatrix,
    grid: QuadratureGrid,
    t_start: int,
    t_end: int,
    ordering: str = "auto",
    field: SpectralField | None = None,
) -> NDArray[np.complex128]:
    """Mean of :func:`rho_c_at_time` over the integers t_start..t_end, summed in closed form."""
    if not 0 <= t_start <= t_end:
        raise InvalidInputError("need 0 <= t_start <= t_end")
    fld = _get_field(coin, grid, ordering, field)
    f = momentum_weights(ic, fld)
    d = fld.phases[:, :, None] - fld.phases[:, None, :]
    length = t_end - t_start + 1
    z = np.exp(-1j * d)
    flat = np.abs(1 - z) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        geo = np.where(flat, 1.0, (1 - z**length) / (length * (1 - z)))
    avg = np.exp(-1j * d * t_start) * geo
    coef = avg * f[:, :, None] * np.conj(f)[:, None, :]
    rho = np.einsum("nis,nst,njt->ij", fld.vectors, coef, fld.vectors.conj()) * grid.weight
    return _hermitize(rho)


def lambda_spectrum(rho: ArrayLike) -> LambdaSpectrum:
    """
    Ascending eigenvalues and eigenvectors of a density matrix; values within
    1e-10 of zero are set to zero.

    Raises
    ------
    NumericalError
        If an eigenvalue is below -1e-10 or the trace differs from 1 by more
        than 1e-10.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    vals, vecs = np.linalg.eigh(_hermitize(rho))
    if vals[0] < -SPECTRUM_TOL:
        raise NumericalError(f"density matrix has eigenvalue {vals[0]:.3e}")
    vals = np.where(np.abs(vals) < SPECTRUM_TOL, 0.0, vals)
    return LambdaSpectrum(vals, vecs)


def nonseparable_I_closed_density(gamma: float) -> NDArray[np.complex128]:
    """Closed asymptotic density of family I for the 2D Grover walk."""
    a = (1 - 4 / math.pi) * math.cos(gamma)
    b = (1 - 2 / math.pi) * math.cos(gamma)
    return 0.25 * np.array(
        [[1, a, b, b], [a, 1, b, b], [b, b, 1, a], [b, b, a, 1]],
        dtype=np.complex128,
    )


def nonseparable_I_printed_lambdas(gamma: float) -> NDArray[np.float64]:
    """The four family-I eigenvalues exactly as printed (second one included)."""
    c = math.cos(gamma)
    l3 = (1 - (1 - 4 / math.pi) * c) / 4
    return np.array([(1 - c) / 4, (1 - (3 - 8 / math.pi) * c) / 4, l3, l3])


def nonseparable_I_printed_temperature(gamma: float) -> float:
    """``2 / |ln[(1 + (4/pi - 1) cos g) / (1 - cos g)]|`` with its 0 and inf limits."""
    c = math.cos(gamma)
    num = 1 + (4 / math.pi - 1) * c
    den = 1 - c
    if den <= 0.0 or num <= 0.0:
        return 0.0
    lg = abs(math.log(num / den))
    # cos(gamma) underflows to ~1e-17 at gamma = pi/2
    return math.inf if lg < 1e-12 else 2.0 / lg


class FamilyITemperature(NamedTuple):
    gamma: float
    printed: float
    oracle: float
    spectrum: NDArray[np.float64]


def nonseparable_I_temperature(
    gamma: float,
    coin: CoinMatrix,
    grid: QuadratureGrid,
    field: SpectralField | None = None,
) -> FamilyITemperature:
    """
    Family-I temperature two ways: the printed closed formula and the
    temperature of the quadrature density matrix.

    Near gamma = pi/2 the quadrature spectrum is uniform to within rounding
    and the oracle reports +inf.
    """
    rho = asymptotic_density(NonSeparableIC("I", BlochPoint(gamma, 0.0)), coin, grid, field=field)
    spec = lambda_spectrum(rho).values
    return FamilyITemperature(gamma, nonseparable_I_printed_temperature(gamma), temperature(spec), spec)


def family_sampler(family: str, coin: CoinMatrix, grid: QuadratureGrid, field: SpectralField | None = None) -> Callable[[float, float], NDArray[np.float64]]:
    """``(gamma, phi) -> ascending spectrum`` of a non-separable family, for Bloch averages."""
    fld = _get_field(coin, grid, "auto", field)

    def sample(gamma: float, phi: float) -> NDArray[np.float64]:
        rho = asymptotic_density(NonSeparableIC(family, BlochPoint(gamma, phi)), coin, grid, field=fld)
        return lambda_spectrum(rho).values

    return sample
