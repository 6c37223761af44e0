"""
Randomized invariant checks behind ``qwthermo validate``.

Each check draws from a generator seeded by the caller and returns a
:class:`CheckResult`; sizes are kept small so the whole run takes seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import asymptotics as asy
from .coin import dft_forward_grid, dft_inverse_box, eigensystem, eigensystem_batch, initial_weights, momentum_coin, propagate_momentum, random_coin
from .grover import closed_eigensystem, diabolical_eigensystem, dispersion, grover_coin, grover_momentum_coin, order_grover_branches
from .initial import BlochPoint, NonSeparableIC, SeparableGaussianIC, gaussian_momentum_profile, gaussian_position_amplitudes
from .lattice import WalkerState, evolve, step
from .thermo import energy_levels, entropy, helmholtz, internal_energy, partition_function, temperature


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.1e})"


def _result(name: str, measured: float, tol: float) -> CheckResult:
    return CheckResult(name, bool(measured < tol), float(measured), tol)


def _random_k(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=(n, dim))


def check_coin_unitarity(rng):
    worst = 0.0
    for dim in (1, 2, 3):
        coin = random_coin(dim, rng)
        ck = momentum_coin(coin, _random_k(rng, 200, dim))
        worst = max(worst, np.abs(np.conj(np.swapaxes(ck, 1, 2)) @ ck - np.eye(2 * dim)).max())
    return _result("momentum coin unitarity", worst, 1e-12)


def check_reconstruction(rng):
    worst = 0.0
    for dim in (1, 2, 3):
        coin = random_coin(dim, rng)
        ck = momentum_coin(coin, _random_k(rng, 200, dim))
        ph, v = eigensystem_batch(ck)
        rec = np.einsum("nis,ns,njs->nij", v, np.exp(-1j * ph), v.conj())
        worst = max(worst, np.abs(rec - ck).max())
    return _result("eigensystem reconstruction", worst, 1e-10)


def check_parseval_and_propagation(rng):
    worst = 0.0
    coin = random_coin(2, rng)
    for _ in range(20):
        k = _random_k(rng, 1, 2)[0]
        ck = momentum_coin(coin, k)
        b = eigensystem(ck, k)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        f = initial_weights(b, psi)
        worst = max(worst, abs(np.sum(np.abs(f) ** 2) - 1))
        bw = b.with_weights(f)
        direct = psi.copy()
        for t in range(1, 101):
            direct = ck @ direct
            if t % 25 == 0:
                worst = max(worst, np.abs(propagate_momentum(bw, t) - direct).max())
    return _result("Parseval and t-fold propagation", worst, 1e-10)


def check_dispersion(rng):
    k = _random_k(rng, 2000, 2)
    ph, _ = eigensystem_batch(grover_momentum_coin(0.5, k[:, 0], k[:, 1]))
    lam = np.exp(-1j * ph)
    w = dispersion(k[:, 0], k[:, 1])
    target = np.stack([np.ones_like(w), -np.ones_like(w), np.exp(1j * w), np.exp(-1j * w)], axis=1)
    err = np.abs(target[:, :, None] - lam[:, None, :]).min(axis=2)
    return _result("Grover dispersion relation", err.max(), 1e-10)


def check_closed_vs_generic(rng):
    worst = 0.0
    done = 0
    while done < 300:
        k1, k2 = rng.uniform(-np.pi, np.pi, 2)
        if abs(np.cos(k1) - np.cos(k2)) < 1e-3 or math.hypot(k1, k2) < 1e-3:
            continue
        b = closed_eigensystem(k1, k2)
        ph, v = eigensystem_batch(grover_momentum_coin(0.5, k1, k2)[None])
        ph, v = order_grover_branches(ph, v, np.array([[k1, k2]]))
        for s in range(4):
            pc = np.outer(b.vectors[:, s], b.vectors[:, s].conj())
            pg = np.outer(v[0][:, s], v[0][:, s].conj())
            worst = max(worst, np.abs(pc - pg).max())
        done += 1
    return _result("closed vs generic Grover projectors", worst, 1e-9)


def check_diabolical_limit(rng):
    worst = 0.0
    for theta in (0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2, rng.uniform(0, 2 * np.pi)):
        k = 1e-4 * np.array([np.cos(theta), np.sin(theta)])
        ph, v = eigensystem_batch(grover_momentum_coin(0.5, k[0], k[1])[None])
        ph, v = order_grover_branches(ph, v, k[None])
        lim = diabolical_eigensystem(theta)
        for s in range(4):
            worst = max(worst, np.abs(np.outer(v[0][:, s], v[0][:, s].conj()) - np.outer(lim[:, s], lim[:, s].conj())).max())
    return _result("diabolical limit projectors", worst, 1e-3)


def check_lattice_norm(rng):
    coin = random_coin(1, rng)
    st = WalkerState.localized(np.array([1.0, 1j]) / math.sqrt(2))
    per_step = 0.0
    for _ in range(500):
        nxt = step(st, coin)
        per_step = max(per_step, abs(nxt.norm_sq - st.norm_sq))
        st = nxt
    total = abs(st.norm_sq - 1)
    return _result("lattice norm conservation (500 steps)", max(total, per_step * 1e3), 1e-9)


def check_spectral_vs_direct(rng):
    coin = grover_coin()
    ic = SeparableGaussianIC(2.0, tuple(rng.uniform(-2, 2, 2)), BlochPoint(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)))
    s0 = gaussian_position_amplitudes(ic)
    t = 20
    direct = evolve(s0, coin, t, prune_tol=None)
    grid = asy.QuadratureGrid(96)
    fld = asy.spectral_field(coin, grid)
    f0 = dft_forward_grid(s0, grid.m).reshape(-1, 4)
    ft = np.einsum("nis,ns->ni", fld.vectors, np.exp(-1j * fld.phases * t) * np.einsum("nsi,ni->ns", fld.vectors.conj().transpose(0, 2, 1), f0))
    back = dft_inverse_box(ft.reshape(grid.m, grid.m, 4), direct.origin, direct.shape)
    return _result("spectral vs direct evolution", np.abs(back - direct.amplitudes).max(), 1e-9)


def check_poisson(rng):
    worst = 0.0
    for sigma in (1.0, 2.0, 5.0):
        k0 = rng.uniform(-2, 2)
        ks = rng.uniform(-np.pi, np.pi, 100)
        x = np.arange(-60, 61)
        direct = np.exp(-1j * np.outer(ks - k0, x)) @ np.exp(-(x**2) / (2 * sigma**2))
        poisson = gaussian_momentum_profile(sigma, [k0], ks[:, None], normalized=False)
        worst = max(worst, np.abs(poisson - direct).max() / np.abs(direct).max())
    return _result("Poisson image sum vs direct lattice sum", worst, 1e-8)


def check_thermo(rng):
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 9))
        lam = np.sort(rng.dirichlet(np.ones(n)))
        if lam[-1] - lam[0] < 1e-6:
            continue
        t = temperature(lam)
        beta = 1 / t
        eps = energy_levels(lam)
        z = partition_function(eps, beta)
        a = helmholtz(z, beta)
        u = internal_energy(lam, eps)
        s = entropy(lam)
        worst = max(worst, abs(s - beta * (u - a)), np.abs(np.exp(-beta * eps) / z - lam).max())
        if not 0 <= s <= math.log(n) + 1e-12:
            worst = math.inf
    return _result("thermodynamic identities", worst, 1e-12)


def check_families(rng):
    coin = grover_coin()
    grid = asy.QuadratureGrid(64)
    fld = asy.spectral_field(coin, grid)
    worst = 0.0
    for _ in range(3):
        bp = BlochPoint(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        worst = max(worst, np.abs(asy.asymptotic_density(NonSeparableIC("II", bp), coin, grid, field=fld) - np.eye(4) / 4).max())
        rho_i = asy.asymptotic_density(NonSeparableIC("I", bp), coin, grid, field=fld)
        worst = max(worst, np.abs(rho_i - asy.nonseparable_I_closed_density(bp.gamma)).max())
    return _result("family I closed form and family II identity", worst, 1e-6)


CHECKS: list[Callable[[np.random.Generator], CheckResult]] = [
    check_coin_unitarity,
    check_reconstruction,
    check_parseval_and_propagation,
    check_dispersion,
    check_closed_vs_generic,
    check_diabolical_limit,
    check_lattice_norm,
    check_spectral_vs_direct,
    check_poisson,
    check_thermo,
    check_families,
]


def run_all(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
