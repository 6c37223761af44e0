"""
Initial states: separable Gaussian packets with a Bloch-parametrized coin
state, their delta-like limit, and the two non-separable families defined
directly on the momentum eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coin import CoinMatrix, SpectralBundle, check_momentum, eigensystem, eigensystem_batch, momentum_coin
from .errors import BranchSingularityError, DegeneracyError, InvalidInputError
from .grover import align_grover_gauge, closed_eigensystem, diabolical_eigensystem, is_grover_half, order_grover_branches
from .lattice import WalkerState

__all__ = [
    "BlochPoint",
    "SeparableGaussianIC",
    "NonSeparableIC",
    "chi_vector",
    "gaussian_position_amplitudes",
    "gaussian_momentum_profile",
    "delta_limit_lambdas",
    "nonseparable_coefficients",
    "nonseparable_momentum_state",
    "resolve_ordering",
]

Family = Literal["I", "II"]
WINDOW_SIGMAS = 8.0
IMAGE_CUTOFF = 1e-30


@dataclass(frozen=True)
class BlochPoint:
    gamma: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= math.pi:
            raise InvalidInputError(f"gamma must lie in [0, pi], got {self.gamma}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise InvalidInputError(f"phi must lie in [0, 2 pi), got {self.phi}")


@dataclass(frozen=True)
class SeparableGaussianIC:
    """
    ``psi_x = xi_x chi`` with ``xi_x ~ exp(i k0.x) exp(-x.x / (2 sigma^2))``.

    ``sigma = inf`` denotes the delta-like limit, which only exists
    analytically (see :func:`delta_limit_lambdas`).
    """

    sigma: float
    k0: tuple[float, ...]
    bloch: BlochPoint = field(default_factory=BlochPoint)

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")
        k0 = tuple(float(c) for c in np.atleast_1d(self.k0))
        if any(not -math.pi < c < math.pi for c in k0):
            raise InvalidInputError("k0 components must lie strictly inside (-pi, pi)")
        object.__setattr__(self, "k0", k0)

    @property
    def dim_n(self) -> int:
        return len(self.k0)

    @property
    def is_delta_limit(self) -> bool:
        return math.isinf(self.sigma)


@dataclass(frozen=True)
class NonSeparableIC:
    """Family I splits branches as s <= N / s > N, family II as even / odd s."""

    family: Family
    bloch: BlochPoint = field(default_factory=BlochPoint)

    def __post_init__(self) -> None:
        if self.family not in ("I", "II"):
            raise InvalidInputError(f"family must be 'I' or 'II', got {self.family!r}")


def chi_vector(dim_n: int, bloch: BlochPoint) -> NDArray[np.complex128]:
    """
    ``cos(gamma/2)|Z+> + exp(i phi) sin(gamma/2)|Z->`` with
    ``|Z+-> = sum_alpha |alpha, +->/sqrt(N)``.
    """
    if dim_n < 1:
        raise InvalidInputError("dimension must be positive")
    v = np.empty(2 * dim_n, dtype=np.complex128)
    v[0::2] = math.cos(bloch.gamma / 2)
    v[1::2] = np.exp(1j * bloch.phi) * math.sin(bloch.gamma / 2)
    return v / math.sqrt(dim_n)


def gaussian_position_amplitudes(ic: SeparableGaussianIC, window: int | None = None) -> WalkerState:
    """
    Lattice Gaussian packet on the box ``[-window, window]^N``, normalized.

    ``window`` defaults to ``ceil(8 sigma)`` and may not be smaller.
    """
    if ic.is_delta_limit:
        raise InvalidInputError("the sigma -> inf limit has no lattice representation")
    need = math.ceil(WINDOW_SIGMAS * ic.sigma)
    if window is None:
        window = need
    elif window < WINDOW_SIGMAS * ic.sigma:
        raise InvalidInputError(f"window {window} is below {WINDOW_SIGMAS:g} sigma = {WINDOW_SIGMAS * ic.sigma:g}")
    n = ic.dim_n
    x = np.arange(-window, window + 1)
    amp = np.ones((), dtype=np.complex128)
    for a in range(n):
        prof = np.exp(1j * ic.k0[a] * x - x**2 / (2 * ic.sigma**2))
        amp = np.multiply.outer(amp, prof)
    amp = amp / math.sqrt(np.sum(np.abs(amp) ** 2))
    chi = chi_vector(n, ic.bloch)
    return WalkerState(np.multiply.outer(amp, chi), np.full(n, -window))


def _image_range(sigma: float) -> int:
    # |k - k0| < 2 pi, so image m contributes below IMAGE_CUTOFF once
    # 2 pi (|m| - 1) sigma > sqrt(-2 ln IMAGE_CUTOFF)
    return int(math.ceil(math.sqrt(-2 * math.log(IMAGE_CUTOFF)) / (2 * math.pi * sigma))) + 1


def gaussian_momentum_profile(sigma: float, k0: ArrayLike, k: ArrayLike, normalized: bool = True) -> NDArray[np.complex128]:
    """
    Transform of the lattice Gaussian via its image sum,

        sum_x exp(-i (k - k0).x) exp(-x.x / (2 sigma^2))
            = (sqrt(2 pi) sigma)^N prod_alpha sum_m exp(-sigma^2 (k_alpha - k0_alpha + 2 pi m)^2 / 2).

    With ``normalized`` the packet is first scaled to unit norm on the
    infinite lattice, so that the result is exactly the momentum amplitude of
    the normalized state. ``k`` may be a stack (..., N).
    """
    k0 = np.atleast_1d(np.asarray(k0, dtype=np.float64))
    n = k0.size
    k = np.asarray(k, dtype=np.float64)
    if k.shape[-1:] != (n,):
        raise InvalidInputError(f"momentum needs {n} components")
    mmax = _image_range(sigma)
    m = np.arange(-mmax, mmax + 1)
    q = (k - k0)[..., None] + 2 * np.pi * m
    per_axis = math.sqrt(2 * math.pi) * sigma * np.exp(-(sigma**2) * q**2 / 2).sum(axis=-1)
    out = np.prod(per_axis, axis=-1).astype(np.complex128)
    if normalized:
        r = math.ceil(10 * sigma) + 10
        xs = np.arange(-r, r + 1)
        z1 = float(np.sum(np.exp(-(xs**2) / sigma**2)))
        out = out / z1 ** (n / 2)
    return out


def resolve_ordering(coin: CoinMatrix, ordering: str = "auto") -> str:
    """'grover' for the p = 1/2 Grover coin under 'auto', otherwise 'eigenphase'."""
    if ordering == "auto":
        return "grover" if is_grover_half(coin) else "eigenphase"
    if ordering not in ("grover", "eigenphase"):
        raise InvalidInputError(f"unknown branch ordering {ordering!r}")
    if ordering == "grover" and not is_grover_half(coin):
        raise InvalidInputError("grover branch ordering needs the p = 1/2 Grover coin")
    return ordering


def _ordered_bundle(coin: CoinMatrix, k: NDArray[np.float64], ordering: str) -> SpectralBundle:
    ck = momentum_coin(coin, k)
    if ordering == "grover":
        try:
            # walk frame at k is the printed matrix at -k
            b = closed_eigensystem(-k[0], -k[1])
            return SpectralBundle(k=k, phases=b.phases, vectors=b.vectors, ordering="grover")
        except BranchSingularityError:
            ph, vec = eigensystem_batch(ck[None])
            ph, vec = order_grover_branches(ph, vec, k[None])
            vec = align_grover_gauge(vec, k[None])
            return SpectralBundle(k=k, phases=ph[0], vectors=vec[0], ordering="grover")
    return eigensystem(ck, k)


def delta_limit_lambdas(
    coin: CoinMatrix,
    k0: ArrayLike,
    bloch: BlochPoint,
    theta: float | None = None,
    ordering: str = "auto",
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """
    Asymptotic spectrum of an infinitely wide packet at momentum ``k0``:
    ``Lambda_s = |<phi_s(k0)|chi>|^2`` with eigenvectors ``phi_s(k0)``.

    Values come in branch order, not sorted. At the diabolical point of the
    Grover coin (k0 = 0) the eigenbasis depends on the approach angle
    ``theta`` (G frame), which must then be given.

    Raises
    ------
    DegeneracyError
        If the eigenbasis at ``k0`` is degenerate and no approach angle
        resolves it.
    """
    k0 = check_momentum(k0, coin.dim_n)
    if np.any(np.abs(k0) >= np.pi):
        raise InvalidInputError("k0 must lie strictly inside (-pi, pi)")
    chi = chi_vector(coin.dim_n, bloch)
    order = resolve_ordering(coin, ordering)
    if order == "grover" and np.hypot(*k0) < 1e-6:
        if theta is None:
            raise DegeneracyError("k0 = 0 is a diabolical point of the Grover walk; pass theta")
        vecs = diabolical_eigensystem(theta)
    else:
        bundle = _ordered_bundle(coin, k0, order)
        if any(len(c) > 1 for c in bundle.clusters()):
            raise DegeneracyError(f"eigenbasis at k0={k0.tolist()} is degenerate")
        vecs = bundle.vectors
    lam = np.abs(np.conj(vecs.T) @ chi) ** 2
    return lam, vecs


def nonseparable_coefficients(family: Family, bloch: BlochPoint, size: int) -> NDArray[np.complex128]:
    """Coefficients ``c_s`` of the family state ``sum_s c_s phi_s`` (branch order, 0-based)."""
    n = size // 2
    c = math.cos(bloch.gamma / 2) / math.sqrt(n)
    s = np.exp(1j * bloch.phi) * math.sin(bloch.gamma / 2) / math.sqrt(n)
    out = np.empty(size, dtype=np.complex128)
    if family == "I":
        out[:n], out[n:] = c, s
    elif family == "II":
        # 1-based even branches take the cosine
        out[1::2], out[0::2] = c, s
    else:
        raise InvalidInputError(f"family must be 'I' or 'II', got {family!r}")
    return out


def nonseparable_momentum_state(family: Family, bloch: BlochPoint, bundle: SpectralBundle) -> NDArray[np.complex128]:
    """
    Momentum-space coin vector of family I or II at the bundle's k.

    Raises
    ------
    InvalidInputError
        If the bundle has no branch ordering.
    """
    if bundle.ordering is None:
        raise InvalidInputError("family states need an ordered eigenbasis")
    return bundle.vectors @ nonseparable_coefficients(family, bloch, bundle.size)
