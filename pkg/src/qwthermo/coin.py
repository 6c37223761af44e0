"""
Momentum-space algebra of coined walks on the N-dimensional lattice.

The coin space has dimension 2N. Chirality |alpha, eta> is stored at the
flattened index ``2*(alpha-1) + (0 if eta == + else 1)``, i.e. the order is
(1,+), (1,-), (2,+), (2,-), ... A walker in chirality (alpha, eta) moves by
``eta * u_alpha`` after the coin is applied.

With the transform ``psi_k = sum_x exp(-i k.x) psi_x`` one step of the walk
acts at fixed quasi-momentum k as the 2N x 2N unitary
``C_k[(alpha,eta), :] = exp(-i eta k_alpha) * C[(alpha,eta), :]``.
Its eigenvalues are written ``exp(-i omega)`` with eigenphase omega in
(-pi, pi].
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import schur
from scipy.stats import unitary_group

from .errors import InvalidInputError

if TYPE_CHECKING:
    from .lattice import WalkerState

__all__ = [
    "CLUSTER_TOL",
    "CoinMatrix",
    "SpectralBundle",
    "chirality_index",
    "check_momentum",
    "random_coin",
    "momentum_coin",
    "eigensystem",
    "eigensystem_batch",
    "cluster_labels",
    "initial_weights",
    "propagate_momentum",
    "grid_nodes_1d",
    "dft_forward",
    "dft_forward_grid",
    "dft_inverse",
    "dft_inverse_box",
]

UNITARY_TOL = 1e-12
UNITARY_ACCEPT = 1e-8
CLUSTER_TOL = 1e-9


def chirality_index(alpha: int, eta: int) -> int:
    """Flattened index of |alpha, eta> with alpha counted from 1 and eta = +1 or -1."""
    if alpha < 1 or eta not in (1, -1):
        raise InvalidInputError(f"bad chirality (alpha={alpha}, eta={eta})")
    return 2 * (alpha - 1) + (0 if eta == 1 else 1)


def _eta(dim_n: int) -> NDArray[np.float64]:
    return np.tile([1.0, -1.0], dim_n)


def unitarity_residual(u: NDArray[np.complex128]) -> float:
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - eye)))


@dataclass(frozen=True)
class CoinMatrix:
    """
    A 2N x 2N unitary coin acting on the chirality space.

    Parameters
    ----------
    entries : array_like
        Square complex matrix of even size 2N.
    label : str
        Free-form tag carried into outputs. Coins built by
        :func:`qwthermo.grover.grover_coin` use ``"grover(p=...)"``.
    tol : float
        Accepted unitarity residual ``max|C^dagger C - I|``.
    """

    entries: NDArray[np.complex128]
    label: str = "custom"
    tol: float = field(default=UNITARY_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 or a.shape[0] == 0:
            raise InvalidInputError(f"coin must be a square 2N x 2N matrix, got shape {a.shape}")
        res = unitarity_residual(a)
        if res > self.tol:
            raise InvalidInputError(f"coin is not unitary (residual {res:.3e} > {self.tol:.1e})")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim_n(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def random_coin(dim_n: int, rng: np.random.Generator | int | None = None) -> CoinMatrix:
    """Haar-random 2N x 2N coin."""
    rng = np.random.default_rng(rng)
    u = unitary_group.rvs(2 * dim_n, random_state=rng)
    return CoinMatrix(u, label=f"haar(N={dim_n})")


def check_momentum(k: ArrayLike, dim_n: int) -> NDArray[np.float64]:
    """
    Validate quasi-momenta.

    Accepts a single vector of length N or a stack of shape (..., N) and
    returns it as a float array. Every component must lie in [-pi, pi].
    """
    k = np.asarray(k, dtype=np.float64)
    if k.ndim == 0:
        k = k.reshape(1)
    if k.shape[-1] != dim_n:
        raise InvalidInputError(f"momentum has {k.shape[-1]} components, coin needs {dim_n}")
    if not np.all(np.isfinite(k)) or np.any(np.abs(k) > np.pi):
        raise InvalidInputError("momentum components must lie in [-pi, pi]")
    return k


def momentum_coin(coin: CoinMatrix, k: ArrayLike) -> NDArray[np.complex128]:
    """
    One-step operator of the walk at quasi-momentum ``k``.

    Row (alpha, eta) of the coin is multiplied by ``exp(-i eta k_alpha)``.
    ``k`` may be a stack of shape (..., N); the result then has shape
    (..., 2N, 2N).
    """
    k = check_momentum(k, coin.dim_n)
    phases = np.exp(-1j * np.repeat(k, 2, axis=-1) * _eta(coin.dim_n))
    return phases[..., :, None] * coin.entries


@dataclass(frozen=True)
class SpectralBundle:
    """
    Eigen-decomposition of ``C_k`` at a single quasi-momentum.

    ``vectors[:, s]`` is the eigenvector with eigenvalue ``exp(-1j * phases[s])``.
    ``ordering`` names the branch convention: ``"eigenphase"`` (ascending),
    ``"grover"`` (lambda = 1, -1, e^{i w}, e^{-i w}) or None when the branch
    order carries no meaning.
    """

    k: NDArray[np.float64]
    phases: NDArray[np.float64]
    vectors: NDArray[np.complex128]
    weights: Optional[NDArray[np.complex128]] = None
    ordering: Optional[str] = "eigenphase"

    @property
    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.exp(-1j * self.phases)

    @property
    def size(self) -> int:
        return self.phases.shape[0]

    def with_weights(self, weights: ArrayLike) -> "SpectralBundle":
        w = np.asarray(weights, dtype=np.complex128)
        if w.shape != self.phases.shape:
            raise InvalidInputError(f"weights need shape {self.phases.shape}, got {w.shape}")
        return replace(self, weights=w)

    def clusters(self, tol: float = CLUSTER_TOL) -> list[list[int]]:
        """Groups of branch indices whose eigenvalues coincide within ``tol``."""
        labels = cluster_labels(self.eigenvalues[None, :], tol)[0]
        return [list(np.flatnonzero(labels == c)) for c in np.unique(labels)]


def _principal_phase(lam: NDArray[np.complex128]) -> NDArray[np.float64]:
    w = -np.angle(lam)
    return np.where(w <= -np.pi, w + 2 * np.pi, w)


def cluster_labels(eigvals: NDArray[np.complex128], tol: float = CLUSTER_TOL) -> NDArray[np.int64]:
    """
    Connected components of the relation ``|lambda_i - lambda_j| < tol``.

    ``eigvals`` has shape (n, d); the result labels each branch with the
    smallest index of its cluster.
    """
    n, d = eigvals.shape
    close = np.abs(eigvals[:, :, None] - eigvals[:, None, :]) < tol
    labels = np.broadcast_to(np.arange(d), (n, d)).copy()
    # d <= ~16, so d rounds of min-propagation reach the fixed point
    for _ in range(d):
        cand = np.where(close, labels[:, None, :], d).min(axis=2)
        if np.array_equal(cand, labels):
            break
        labels = cand
    return labels


def _orthonormalize_clusters(lam: NDArray[np.complex128], vec: NDArray[np.complex128], mat: NDArray[np.complex128]) -> None:
    labels = cluster_labels(lam[None, :])[0]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size == 1:
            continue
        q, r = np.linalg.qr(vec[:, idx])
        if np.min(np.abs(np.diag(r))) < 1e-6:
            # eig returned a nearly dependent set; the complex Schur form of a
            # normal matrix is diagonal with unitary Schur vectors
            t, z = schur(mat, output="complex")
            lam[:] = np.diag(t)
            vec[:] = z
            return
        vec[:, idx] = q


def _symmetric_orthonormalize(vec: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # eig loses orthogonality like eps/gap for close eigenvalues; V (V^H V)^(-1/2)
    # is the nearest orthonormal set and leaves well-separated columns unchanged
    gram = np.conj(np.swapaxes(vec, 1, 2)) @ vec
    bad = np.flatnonzero(np.abs(gram - np.eye(vec.shape[1])).max(axis=(1, 2)) > 1e-14)
    if bad.size:
        w, u = np.linalg.eigh(gram[bad])
        inv_sqrt = (u / np.sqrt(w)[:, None, :]) @ np.conj(np.swapaxes(u, 1, 2))
        vec = vec.copy()
        vec[bad] = vec[bad] @ inv_sqrt
    return vec


def eigensystem_batch(cks: NDArray[np.complex128]) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """
    Eigenphases and orthonormal eigenvectors of a stack of unitaries.

    Parameters
    ----------
    cks : ndarray, shape (n, d, d)

    Returns
    -------
    phases : ndarray, shape (n, d)
        Eigenphases in (-pi, pi], ascending along the last axis.
    vectors : ndarray, shape (n, d, d)
        ``vectors[i, :, s]`` belongs to ``phases[i, s]``. Inside clusters of
        coinciding eigenvalues the columns are re-orthonormalized.

    Raises
    ------
    InvalidInputError
        If any matrix has unitarity residual above 1e-8.
    """
    cks = np.asarray(cks, dtype=np.complex128)
    if cks.ndim != 3 or cks.shape[1] != cks.shape[2]:
        raise InvalidInputError(f"expected a stack of square matrices, got {cks.shape}")
    eye = np.eye(cks.shape[1])
    res = np.abs(np.conj(np.swapaxes(cks, 1, 2)) @ cks - eye).max(axis=(1, 2))
    if np.any(res > UNITARY_ACCEPT):
        raise InvalidInputError(f"matrix is not unitary (residual {res.max():.3e})")
    lam, vec = np.linalg.eig(cks)
    vec = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    d = cks.shape[1]
    off = ~np.eye(d, dtype=bool)
    gaps = np.abs(lam[:, :, None] - lam[:, None, :])
    for i in np.flatnonzero(np.any((gaps < CLUSTER_TOL) & off, axis=(1, 2))):
        _orthonormalize_clusters(lam[i], vec[i], cks[i])
    vec = _symmetric_orthonormalize(vec)
    phases = _principal_phase(lam)
    order = np.argsort(phases, axis=1, kind="stable")
    phases = np.take_along_axis(phases, order, axis=1)
    vec = np.take_along_axis(vec, order[:, None, :], axis=2)
    return phases, vec


def eigensystem(ck: ArrayLike, k: ArrayLike | None = None) -> SpectralBundle:
    """
    Diagonalize a single unitary ``C_k``.

    The bundle is ordered by ascending eigenphase. ``k`` is only recorded.
    """
    ck = np.asarray(ck, dtype=np.complex128)
    phases, vec = eigensystem_batch(ck[None])
    kk = np.full(ck.shape[0] // 2, np.nan) if k is None else np.asarray(k, dtype=np.float64)
    return SpectralBundle(k=kk, phases=phases[0], vectors=vec[0], ordering="eigenphase")


def initial_weights(bundle: SpectralBundle, psi0_k: ArrayLike) -> NDArray[np.complex128]:
    """Projections ``f_s = <phi_s | psi0_k>`` of a momentum-space coin vector."""
    psi = np.asarray(psi0_k, dtype=np.complex128)
    if psi.shape != (bundle.size,):
        raise InvalidInputError(f"state needs shape ({bundle.size},), got {psi.shape}")
    return np.conj(bundle.vectors.T) @ psi


def propagate_momentum(bundle: SpectralBundle, t: int) -> NDArray[np.complex128]:
    """``sum_s exp(-i omega_s t) f_s phi_s``; requires weights on the bundle."""
    if bundle.weights is None:
        raise InvalidInputError("bundle carries no initial weights")
    if t < 0:
        raise InvalidInputError("time must be non-negative")
    return bundle.vectors @ (np.exp(-1j * bundle.phases * t) * bundle.weights)


def grid_nodes_1d(m: int) -> NDArray[np.float64]:
    """Midpoint nodes ``-pi + (2 pi / m)(j + 1/2)``, j = 0..m-1."""
    return -np.pi + (2 * np.pi / m) * (np.arange(m) + 0.5)


def _axis_coords(state: "WalkerState") -> list[NDArray[np.int64]]:
    return [state.origin[a] + np.arange(state.shape[a]) for a in range(state.dim_n)]


def dft_forward(state: "WalkerState", k: ArrayLike) -> NDArray[np.complex128]:
    """
    ``sum_x exp(-i k.x) psi_x`` for one momentum (N,) or a stack (P, N).

    Raises
    ------
    InvalidInputError
        For an empty state.
    """
    if state.amplitudes.size == 0:
        raise InvalidInputError("state has empty support")
    k = check_momentum(k, state.dim_n)
    single = k.ndim == 1
    kk = k.reshape(-1, state.dim_n)
    coords = _axis_coords(state)
    e = np.exp(-1j * kk[:, 0:1] * coords[0][None, :])
    out = np.tensordot(e, state.amplitudes, axes=(1, 0))
    for a in range(1, state.dim_n):
        e = np.exp(-1j * kk[:, a : a + 1] * coords[a][None, :])
        out = np.einsum("pb,pb...->p...", e, out)
    return out[0] if single else out


def dft_forward_grid(state: "WalkerState", m: int) -> NDArray[np.complex128]:
    """
    Forward transform sampled on the full midpoint grid, shape (m,)*N + (2N,).

    Uses FFTs; supports wider than ``m`` are folded modulo ``m`` first, which
    is exact because the grid phases are periodic in x with period m.
    """
    if state.amplitudes.size == 0:
        raise InvalidInputError("state has empty support")
    shift = np.pi - np.pi / m
    a = state.amplitudes
    for ax in range(state.dim_n):
        n = np.arange(state.shape[ax])
        pre = np.exp(1j * shift * n).reshape([-1 if i == ax else 1 for i in range(a.ndim)])
        a = a * pre
        if state.shape[ax] > m:
            pad = (-state.shape[ax]) % m
            widths = [(0, pad if i == ax else 0) for i in range(a.ndim)]
            a = np.pad(a, widths)
            shape = list(a.shape)
            a = a.reshape(shape[:ax] + [-1, m] + shape[ax + 1 :]).sum(axis=ax)
        elif state.shape[ax] < m:
            widths = [(0, m - state.shape[ax] if i == ax else 0) for i in range(a.ndim)]
            a = np.pad(a, widths)
    f = np.fft.fftn(a, axes=tuple(range(state.dim_n)))
    nodes = grid_nodes_1d(m)
    for ax in range(state.dim_n):
        post = np.exp(-1j * nodes * state.origin[ax]).reshape([-1 if i == ax else 1 for i in range(f.ndim)])
        f = f * post
    return f


def dft_inverse(field: ArrayLike, x: ArrayLike) -> NDArray[np.complex128]:
    """
    Riemann-sum inverse transform at lattice point(s) ``x``.

    ``field`` is sampled on the midpoint grid, shape (M,)*N + (2N,); each node
    carries weight 1/M^N. ``x`` is one point (N,) or a stack (P, N).
    """
    field = np.asarray(field, dtype=np.complex128)
    dim_n = field.ndim - 1
    m = field.shape[0]
    if dim_n < 1 or any(s != m for s in field.shape[:-1]) or field.shape[-1] != 2 * dim_n:
        raise InvalidInputError(f"field must have shape (M,)*N + (2N,), got {field.shape}")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xx = x.reshape(-1, dim_n)
    nodes = grid_nodes_1d(m)
    e = np.exp(1j * xx[:, 0:1] * nodes[None, :])
    out = np.tensordot(e, field, axes=(1, 0))
    for a in range(1, dim_n):
        e = np.exp(1j * xx[:, a : a + 1] * nodes[None, :])
        out = np.einsum("pb,pb...->p...", e, out)
    out = out / m**dim_n
    return out[0] if single else out


def dft_inverse_box(field: ArrayLike, origin: ArrayLike, shape: tuple[int, ...]) -> NDArray[np.complex128]:
    """Inverse transform on every site of the box ``origin + [0, shape)``; shape + (2N,)."""
    field = np.asarray(field, dtype=np.complex128)
    dim_n = field.ndim - 1
    m = field.shape[0]
    origin = np.asarray(origin, dtype=np.int64)
    nodes = grid_nodes_1d(m)
    shift = -np.pi + np.pi / m
    g = field
    for ax in range(dim_n):
        pre = np.exp(1j * nodes * origin[ax]).reshape([-1 if i == ax else 1 for i in range(g.ndim)])
        g = g * pre
    g = np.fft.ifftn(g, axes=tuple(range(dim_n)))
    for ax in range(dim_n):
        n = np.arange(shape[ax])
        g = np.take(g, n % m, axis=ax)
        post = np.exp(1j * shift * n).reshape([-1 if i == ax else 1 for i in range(g.ndim)])
        g = g * post
    return g
