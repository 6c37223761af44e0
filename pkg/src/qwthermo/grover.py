"""
Closed forms for the one-parameter Grover family on the square lattice.

All closed forms here are written in the frame of the printed matrix
``G(p; k1, k2)`` whose first row carries ``exp(+i k1)``. The walk's own
one-step operator (:func:`qwthermo.coin.momentum_coin`) uses
``exp(-i eta k_alpha)``, so for the Grover coin

    momentum_coin(grover_coin(p), k) == grover_momentum_coin(p, -k1, -k2).

Eigenvalues depend on k only through cos k1 and cos k2 and are therefore
the same in both frames; eigenvectors and the approach angle ``theta`` of
the diabolical limit refer to the G frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment

from .coin import CoinMatrix, SpectralBundle, eigensystem_batch
from .errors import BranchSingularityError, InvalidInputError
from .thermo import temperature

__all__ = [
    "GroverParams",
    "grover_coin",
    "is_grover_half",
    "grover_momentum_coin",
    "dispersion",
    "closed_eigensystem",
    "order_grover_branches",
    "closed_vectors",
    "align_grover_gauge",
    "diabolical_eigensystem",
    "diabolical_lambdas",
    "diabolical_lambdas_x",
    "diabolical_temperature",
    "isotherm_parameter",
    "bloch_isotherm_map",
]

SINGULAR_TOL = 1e-6
PLATEAU = (-3 / 5, -1 / 3)


@dataclass(frozen=True)
class GroverParams:
    p: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError(f"p must lie in [0, 1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


def _params(p: GroverParams | float) -> GroverParams:
    return p if isinstance(p, GroverParams) else GroverParams(float(p))


def grover_momentum_coin(p: GroverParams | float, k1: ArrayLike, k2: ArrayLike) -> NDArray[np.complex128]:
    """
    The printed 4x4 family matrix ``G(p; k1, k2)``; broadcasts over k1, k2.

    p = 1/2 is the Grover coin.
    """
    par = _params(p)
    pp, qq = par.p, par.q
    r = np.sqrt(pp * qq)
    e1 = np.exp(1j * np.asarray(k1, dtype=np.float64))
    e2 = np.exp(1j * np.asarray(k2, dtype=np.float64))
    e1, e2 = np.broadcast_arrays(e1, e2)
    rows = np.array(
        [
            [-pp, qq, r, r],
            [qq, -pp, r, r],
            [r, r, -qq, pp],
            [r, r, pp, -qq],
        ]
    )
    ph = np.stack([e1, 1 / e1, e2, 1 / e2], axis=-1)
    return ph[..., :, None] * rows


def grover_coin(p: GroverParams | float = 0.5) -> CoinMatrix:
    """Position-space coin of the family (the k = 0 matrix)."""
    par = _params(p)
    return CoinMatrix(grover_momentum_coin(par, 0.0, 0.0), label=f"grover(p={par.p!r})")


def is_grover_half(coin: CoinMatrix) -> bool:
    """True when ``coin`` is the p = 1/2 Grover coin."""
    return coin.size == 4 and bool(np.allclose(coin.entries, grover_momentum_coin(0.5, 0.0, 0.0), rtol=0, atol=1e-14))


def dispersion(k1: ArrayLike, k2: ArrayLike) -> NDArray[np.float64]:
    """``omega`` in [0, pi] with ``cos omega = -(cos k1 + cos k2)/2``."""
    c = -(np.cos(k1) + np.cos(k2)) / 2
    return np.arccos(np.clip(c, -1.0, 1.0))


def _wrap(k: float) -> float:
    return (k + np.pi) % (2 * np.pi) - np.pi


def closed_eigensystem(k1: float, k2: float, strict: bool = False) -> SpectralBundle:
    """
    Exact eigensystem of ``G(1/2; k1, k2)`` in the order
    lambda = (1, -1, e^{i w}, e^{-i w}).

    The first two vectors are evaluated in a cancelled form that stays finite
    where single components of the printed expression diverge (k_alpha = pi for
    lambda = 1, k_alpha = 0 for lambda = -1); away from those sets the result
    equals the printed vectors exactly, phase included.

    On the removable singularity cos k1 = cos k2 the last two vectors come
    from the generic solver, rephased as in :func:`align_grover_gauge`;
    with ``strict`` that set raises instead.

    Raises
    ------
    BranchSingularityError
        Within 1e-6 of the degenerate points k = 0 (diabolical, use
        :func:`diabolical_eigensystem`) and k = (pi, pi), or of
        cos k1 = cos k2 when ``strict``.
    """
    k1 = float(k1)
    k2 = float(k2)
    w1, w2 = _wrap(k1), _wrap(k2)
    if np.hypot(w1, w2) < SINGULAR_TOL:
        raise BranchSingularityError("diabolical point k = 0; use diabolical_eigensystem(theta)")
    if np.hypot(np.pi - abs(w1), np.pi - abs(w2)) < SINGULAR_TOL:
        raise BranchSingularityError("k = (pi, pi) is a triple degeneracy of lambda = 1")
    c1, c2 = np.cos(k1), np.cos(k2)
    w = float(dispersion(k1, k2))
    phases = np.array([0.0, np.pi, -w, w])
    kk = np.array([[k1, k2]])
    if abs(c1 - c2) < SINGULAR_TOL:
        if strict:
            raise BranchSingularityError("cos k1 = cos k2 is singular for the closed e^{+-iw} vectors; use the generic eigensystem")
        ph, v = order_grover_branches(*eigensystem_batch(grover_momentum_coin(0.5, k1, k2)[None]), kk)
        vecs = align_grover_gauge(v, -kk)[0]
        vecs[:, :2] = closed_vectors(kk)[0][:, :2]
    else:
        vecs = closed_vectors(kk)[0]
    return SpectralBundle(k=np.array([k1, k2]), phases=phases, vectors=vecs, ordering="grover")


def closed_vectors(k: ArrayLike) -> NDArray[np.complex128]:
    """
    Vectorized closed eigenvectors, columns in branch order; ``k`` is (n, 2).

    No singularity checks: columns 3 and 4 are non-finite where
    cos k1 = cos k2.
    """
    k = np.asarray(k, dtype=np.float64)
    k1, k2 = k[:, 0], k[:, 1]
    c1, c2 = np.cos(k1), np.cos(k2)
    h1, h2 = k1 / 2, k2 / 2
    e1, e2 = np.exp(1j * h1), np.exp(1j * h2)
    out = np.empty((k.shape[0], 4, 4), dtype=np.complex128)
    v1 = np.stack([e1 * np.cos(h2), np.conj(e1) * np.cos(h2), e2 * np.cos(h1), np.conj(e2) * np.cos(h1)], axis=1)
    out[:, :, 0] = v1 / np.linalg.norm(v1, axis=1, keepdims=True)
    v2 = np.stack([e1 * np.sin(h2), -np.conj(e1) * np.sin(h2), e2 * np.sin(h1), -np.conj(e2) * np.sin(h1)], axis=1)
    sgn = np.sign(np.sin(h1) * np.sin(h2))
    sgn[sgn == 0] = 1.0
    out[:, :, 1] = v2 * (-1j * sgn / np.linalg.norm(v2, axis=1))[:, None]
    w = dispersion(k1, k2)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm34 = np.sqrt(2 * (4 - (c1 + c2) ** 2) / (c1 - c2) ** 2)
        ph = np.stack([np.exp(-1j * k1), np.exp(1j * k1), np.exp(-1j * k2), np.exp(1j * k2)], axis=1)
        for col, lam in ((2, np.exp(1j * w)), (3, np.exp(-1j * w))):
            out[:, :, col] = 1 / (1 + ph * lam[:, None]) / norm34[:, None]
    return out


def align_grover_gauge(vectors: NDArray[np.complex128], k: NDArray[np.float64]) -> NDArray[np.complex128]:
    """
    Rephase branch-ordered eigenvectors at walk-frame momenta ``k`` (n, 2)
    so that each matches the phase of the closed-form vector.

    On cos k1 = cos k2 the closed vectors of the last two branches have no
    limit; the reference there is taken at k1 + 1e-4, a fixed one-sided
    choice on a set of measure zero.
    """
    kg = -np.asarray(k, dtype=np.float64)
    kg = np.where(np.hypot(kg[:, :1], kg[:, 1:]) < SINGULAR_TOL, kg + [1e-4, 0.0], kg)
    bad = np.abs(np.cos(kg[:, 0]) - np.cos(kg[:, 1])) < SINGULAR_TOL
    kg[bad, 0] += 1e-4
    ref = closed_vectors(kg)
    ov = np.einsum("nis,nis->ns", ref.conj(), vectors)
    mag = np.abs(ov)
    phase = np.where(mag > 0, ov / np.where(mag > 0, mag, 1.0), 1.0)
    return vectors * np.conj(phase)[:, None, :]


def order_grover_branches(
    phases: NDArray[np.float64], vectors: NDArray[np.complex128], k: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """
    Reorder generic eigensolver output of the p = 1/2 family into the
    closed-form branch order (1, -1, e^{i w}, e^{-i w}).

    ``phases`` (n, 4), ``vectors`` (n, 4, 4), ``k`` (n, 2) in either frame.
    """
    w = dispersion(k[:, 0], k[:, 1])
    target = np.stack([np.ones_like(w), -np.ones_like(w), np.exp(1j * w), np.exp(-1j * w)], axis=1)
    lam = np.exp(-1j * phases)
    cost = np.abs(target[:, :, None] - lam[:, None, :])
    order = np.argmin(cost, axis=2)
    for i in np.flatnonzero(np.any(np.sort(order, axis=1) != np.arange(4), axis=1)):
        _, order[i] = linear_sum_assignment(cost[i])
    return np.take_along_axis(phases, order, axis=1), np.take_along_axis(vectors, order[:, None, :], axis=2)


def diabolical_eigensystem(theta: float) -> NDArray[np.complex128]:
    """
    Limits of the four closed eigenvectors as k -> 0 along
    (k1, k2) = k (cos theta, sin theta); columns in branch order.
    """
    theta = float(theta)
    if not 0.0 <= theta < 2 * np.pi:
        raise InvalidInputError("theta must lie in [0, 2 pi)")
    c, s = np.cos(theta), np.sin(theta)
    r = np.sqrt(2.0)
    v1 = np.full(4, 0.5, dtype=np.complex128)
    v2 = (1j / r) * np.array([-s, s, -c, c])
    v3 = (1j / (2 * r)) * np.array([1 - r * c, 1 + r * c, -1 + r * s, -1 - r * s])
    v4 = (1j / (2 * r)) * np.array([-1 - r * c, -1 + r * c, 1 + r * s, 1 - r * s])
    return np.stack([v1, v2, v3, v4], axis=1)


def isotherm_parameter(gamma: ArrayLike, phi: ArrayLike) -> NDArray[np.float64]:
    """``x = sin(gamma) cos(phi)``."""
    return np.sin(gamma) * np.cos(phi)


def diabolical_lambdas_x(x: ArrayLike, theta: float = np.pi) -> NDArray[np.float64]:
    """Asymptotic eigenvalues at the diabolical point as functions of x; shape (..., 4)."""
    x = np.asarray(x, dtype=np.float64)
    s2 = np.sin(2 * theta)
    l1 = (1 + x) / 2
    l2 = (1 + s2) * (1 - x) / 4
    l34 = (1 - s2) * (1 - x) / 8
    return np.stack([l1, l2, l34, l34], axis=-1)


def diabolical_lambdas(gamma: float, phi: float, theta: float) -> NDArray[np.float64]:
    """
    (Lambda_1, .., Lambda_4) for a delta-like packet at k0 = 0 with coin
    state chi(gamma, phi), approaching the diabolical point along theta.
    """
    _check_angles(gamma, phi, theta)
    return diabolical_lambdas_x(isotherm_parameter(gamma, phi), theta)


def diabolical_temperature(gamma: float, phi: float, theta: float) -> float:
    """``T = 2 / ln(Lambda_max / Lambda_min)`` with 0 and +inf limits."""
    return temperature(diabolical_lambdas(gamma, phi, theta))


def _check_angles(gamma: float, phi: float, theta: float) -> None:
    if not 0.0 <= gamma <= np.pi:
        raise InvalidInputError("gamma must lie in [0, pi]")
    if not 0.0 <= phi < 2 * np.pi:
        raise InvalidInputError("phi must lie in [0, 2 pi)")
    if not 0.0 <= theta < 2 * np.pi:
        raise InvalidInputError("theta must lie in [0, 2 pi)")


def bloch_isotherm_map(n_gamma: int = 90, n_phi: int = 180, theta: float = np.pi) -> dict[str, NDArray[np.float64]]:
    """
    Temperature on a (gamma, phi) grid of the Bloch sphere.

    gamma takes the ``n_gamma + 1`` values ``pi i / n_gamma`` (both poles
    included), phi the ``n_phi`` values ``2 pi j / n_phi``. Columns are
    returned flattened with phi varying fastest.
    """
    if n_gamma < 2 or n_phi < 2:
        raise InvalidInputError("grid resolution must be at least 2")
    g = np.pi * np.arange(n_gamma + 1) / n_gamma
    f = 2 * np.pi * np.arange(n_phi) / n_phi
    gg, ff = np.meshgrid(g, f, indexing="ij")
    gg, ff = gg.ravel(), ff.ravel()
    x = isotherm_parameter(gg, ff)
    lam = diabolical_lambdas_x(x, theta)
    t = np.array([temperature(row) for row in lam])
    return {"gamma": gg, "phi": ff, "x": x, "T": t}
