"""
Direct position-space evolution of the walk.

The state lives on a rectangular box of the infinite lattice that grows by
one site per side and axis with every step; there is no wraparound. This is
the independent check on everything computed in momentum space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coin import CoinMatrix
from .errors import InvalidInputError

__all__ = [
    "WalkerState",
    "step",
    "evolve",
    "trajectory",
    "prune",
    "position_distribution",
    "reduced_density",
    "time_averaged_reduced_density",
    "check_density",
]

PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class WalkerState:
    """
    Amplitudes ``psi_x`` on the box ``origin + [0, shape)``.

    ``amplitudes`` has shape ``shape + (2N,)``; sites outside the box hold the
    zero coin vector.
    """

    amplitudes: NDArray[np.complex128]
    origin: NDArray[np.int64]

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        o = np.asarray(self.origin, dtype=np.int64).reshape(-1)
        if a.ndim != o.size + 1 or a.shape[-1] != 2 * o.size:
            raise InvalidInputError(f"amplitudes {a.shape} do not match an {o.size}-dimensional lattice")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "origin", o)

    @property
    def dim_n(self) -> int:
        return self.origin.size

    @property
    def shape(self) -> tuple[int, ...]:
        return self.amplitudes.shape[:-1]

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @classmethod
    def from_mapping(cls, amplitudes: Mapping[tuple[int, ...], ArrayLike], dim_n: int) -> "WalkerState":
        """Build a state from ``{lattice point: coin vector}``."""
        if not amplitudes:
            raise InvalidInputError("empty state")
        pts = np.array([tuple(p) for p in amplitudes], dtype=np.int64).reshape(len(amplitudes), dim_n)
        lo = pts.min(axis=0)
        shape = tuple(pts.max(axis=0) - lo + 1)
        a = np.zeros(shape + (2 * dim_n,), dtype=np.complex128)
        for p, v in zip(pts, amplitudes.values()):
            v = np.asarray(v, dtype=np.complex128)
            if v.shape != (2 * dim_n,):
                raise InvalidInputError(f"coin vector must have length {2 * dim_n}")
            a[tuple(p - lo)] = v
        return cls(a, lo)

    @classmethod
    def localized(cls, chi: ArrayLike, x: ArrayLike | None = None) -> "WalkerState":
        """Walker at a single site ``x`` (default origin) with coin state ``chi``."""
        chi = np.asarray(chi, dtype=np.complex128)
        dim_n = chi.size // 2
        x = np.zeros(dim_n, dtype=np.int64) if x is None else np.asarray(x, dtype=np.int64)
        return cls(chi.reshape((1,) * dim_n + (chi.size,)), x)

    def amplitude(self, x: ArrayLike) -> NDArray[np.complex128]:
        idx = np.asarray(x, dtype=np.int64) - self.origin
        if np.any(idx < 0) or np.any(idx >= self.shape):
            return np.zeros(2 * self.dim_n, dtype=np.complex128)
        return self.amplitudes[tuple(idx)].copy()

    def to_mapping(self, threshold: float = 0.0) -> dict[tuple[int, ...], NDArray[np.complex128]]:
        """Sites whose coin vector has some component above ``threshold`` in modulus."""
        keep = np.abs(self.amplitudes).max(axis=-1) > threshold
        return {
            tuple(int(c) for c in idx + self.origin): self.amplitudes[tuple(idx)].copy()
            for idx in np.argwhere(keep)
        }


def step(state: WalkerState, coin: CoinMatrix) -> WalkerState:
    """One application of coin-then-conditional-shift.

    ``psi'_x[alpha, eta] = sum_s C[(alpha, eta), s] psi_{x - eta u_alpha}[s]``
    """
    if coin.dim_n != state.dim_n:
        raise InvalidInputError(f"{coin.dim_n}-dimensional coin on a {state.dim_n}-dimensional lattice")
    n = state.dim_n
    mixed = state.amplitudes @ coin.entries.T
    out = np.zeros(tuple(s + 2 for s in state.shape) + (2 * n,), dtype=np.complex128)
    for s in range(2 * n):
        alpha, eta = divmod(s, 2)
        eta = 1 if eta == 0 else -1
        sl = tuple(
            slice(1 + (eta if a == alpha else 0), 1 + (eta if a == alpha else 0) + state.shape[a])
            for a in range(n)
        )
        out[sl + (s,)] = mixed[..., s]
    return WalkerState(out, state.origin - 1)


def prune(state: WalkerState, tol: float = PRUNE_TOL) -> WalkerState:
    """Drop boundary slabs whose amplitudes are all at most ``tol`` in modulus."""
    mag = np.abs(state.amplitudes).max(axis=-1)
    if not np.any(mag > tol):
        return state
    sl = []
    lo = state.origin.copy()
    for a in range(state.dim_n):
        other = tuple(i for i in range(state.dim_n) if i != a)
        live = np.flatnonzero(mag.max(axis=other) > tol if other else mag > tol)
        sl.append(slice(live[0], live[-1] + 1))
        lo[a] += live[0]
    return WalkerState(state.amplitudes[tuple(sl)], lo)


def trajectory(state: WalkerState, coin: CoinMatrix, t_max: int, prune_tol: float | None = PRUNE_TOL) -> Iterator[tuple[int, WalkerState]]:
    """Yield ``(t, state_t)`` for t = 0..t_max."""
    yield 0, state
    for t in range(1, t_max + 1):
        state = step(state, coin)
        if prune_tol is not None:
            state = prune(state, prune_tol)
        yield t, state


def evolve(state: WalkerState, coin: CoinMatrix, t: int, prune_tol: float | None = PRUNE_TOL) -> WalkerState:
    """Apply :func:`step` ``t`` times, trimming negligible boundary slabs after each step."""
    if t < 0:
        raise InvalidInputError("number of steps must be non-negative")
    for _, state in trajectory(state, coin, t, prune_tol):
        pass
    return state


def position_distribution(state: WalkerState) -> dict[tuple[int, ...], float]:
    """``P_x = <psi_x|psi_x>`` on every site of the box."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=-1)
    return {tuple(int(c) for c in idx + state.origin): float(p[tuple(idx)]) for idx in np.ndindex(*state.shape)}


def reduced_density(state: WalkerState) -> NDArray[np.complex128]:
    """Partial trace over positions, ``rho_c = sum_x psi_x psi_x^dagger``."""
    flat = state.amplitudes.reshape(-1, 2 * state.dim_n)
    rho = flat.T @ flat.conj()
    return 0.5 * (rho + rho.conj().T)


def time_averaged_reduced_density(
    state0: WalkerState,
    coin: CoinMatrix,
    t_max: int,
    t_burn: int | None = None,
    prune_tol: float | None = PRUNE_TOL,
) -> NDArray[np.complex128]:
    """
    Arithmetic mean of ``reduced_density`` over t in (t_burn, t_max].

    ``t_burn`` defaults to ``t_max // 4``.
    """
    if t_burn is None:
        t_burn = t_max // 4
    if not 0 <= t_burn < t_max:
        raise InvalidInputError(f"need 0 <= t_burn < t_max, got t_burn={t_burn}, t_max={t_max}")
    acc = np.zeros((2 * state0.dim_n,) * 2, dtype=np.complex128)
    for t, st in trajectory(state0, coin, t_max, prune_tol):
        if t > t_burn:
            acc += reduced_density(st)
    return acc / (t_max - t_burn)


def check_density(rho: ArrayLike, tol: float = 1e-10) -> NDArray[np.complex128]:
    """Return ``rho`` if it is Hermitian, unit-trace and PSD within ``tol``."""
    rho = np.asarray(rho, dtype=np.complex128)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidInputError(f"density matrix has trace {np.trace(rho).real:.12f}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise InvalidInputError("density matrix is not positive semidefinite")
    return rho
