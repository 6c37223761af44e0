import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwthermo.coin import (
    CoinMatrix,
    chirality_index,
    dft_forward,
    dft_forward_grid,
    dft_inverse,
    dft_inverse_box,
    eigensystem,
    eigensystem_batch,
    grid_nodes_1d,
    initial_weights,
    momentum_coin,
    propagate_momentum,
    random_coin,
    unitarity_residual,
)
from qwthermo.errors import InvalidInputError
from qwthermo.grover import dispersion, grover_momentum_coin
from qwthermo.initial import BlochPoint, SeparableGaussianIC, gaussian_position_amplitudes
from qwthermo.lattice import WalkerState

seeds = st.integers(0, 2**32 - 1)
angles = st.floats(-np.pi, np.pi, allow_nan=False)


def test_chirality_order():
    assert [chirality_index(a, e) for a in (1, 2) for e in (+1, -1)] == [0, 1, 2, 3]


def test_coin_rejects_non_unitary():
    with pytest.raises(InvalidInputError):
        CoinMatrix(np.ones((2, 2)))
    with pytest.raises(InvalidInputError):
        CoinMatrix(np.eye(3))


def test_identity_coin_phases():
    ck = momentum_coin(CoinMatrix(np.eye(2)), [0.7])
    assert np.allclose(ck, np.diag([np.exp(-0.7j), np.exp(0.7j)]), atol=1e-15)


def test_grover_momentum_coin_is_printed_matrix_at_minus_k(grover, rng):
    for k in rng.uniform(-np.pi, np.pi, (20, 2)):
        ck = momentum_coin(grover, k)
        assert np.abs(ck - grover_momentum_coin(0.5, -k[0], -k[1])).max() < 1e-15
    k = np.array([0.4, -1.3])
    assert np.abs(momentum_coin(grover, k) - grover_momentum_coin(0.5, *k)).max() > 0.1


def test_momentum_coin_input_checks(grover):
    with pytest.raises(InvalidInputError):
        momentum_coin(grover, [0.1])
    with pytest.raises(InvalidInputError):
        momentum_coin(grover, [0.1, 3.2])


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_momentum_coin_unitary(seed, dim):
    rng = np.random.default_rng(seed)
    ck = momentum_coin(random_coin(dim, rng), rng.uniform(-np.pi, np.pi, (8, dim)))
    for m in ck:
        assert unitarity_residual(m) < 1e-12


def test_grover_eigenvalues_at_half_pi(grover):
    b = eigensystem(momentum_coin(grover, [np.pi / 2, np.pi / 2]))
    target = np.array([1, -1, 1j, -1j])
    assert np.abs(target[:, None] - b.eigenvalues[None, :]).min(axis=1).max() < 1e-12


def test_identity_eigenphases():
    b = eigensystem(momentum_coin(CoinMatrix(np.eye(2)), [0.3]))
    assert np.allclose(np.sort(b.phases), [-0.3, 0.3], atol=1e-14)


def test_dispersion_random_k(grover, rng):
    k = rng.uniform(-np.pi, np.pi, (100, 2))
    ph, _ = eigensystem_batch(momentum_coin(grover, k))
    w = dispersion(k[:, 0], k[:, 1])
    target = np.stack([np.ones(100), -np.ones(100), np.exp(1j * w), np.exp(-1j * w)], axis=1)
    lam = np.exp(-1j * ph)
    assert np.abs(target[:, :, None] - lam[:, None, :]).min(axis=2).max() < 1e-10


def test_eigensystem_rejects_non_unitary():
    with pytest.raises(InvalidInputError):
        eigensystem(np.diag([1.0, 1.1]))


def test_degenerate_cluster_orthonormal():
    b = eigensystem(np.eye(4, dtype=complex))
    assert np.abs(b.vectors.conj().T @ b.vectors - np.eye(4)).max() < 1e-12
    assert b.clusters() == [[0, 1, 2, 3]]


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 3))
def test_bundle_invariants(seed, dim):
    rng = np.random.default_rng(seed)
    coin = random_coin(dim, rng)
    k = rng.uniform(-np.pi, np.pi, dim)
    ck = momentum_coin(coin, k)
    b = eigensystem(ck, k)
    v = b.vectors
    assert np.all(np.abs(np.linalg.norm(v, axis=0) - 1) < 1e-12)
    assert np.abs(v.conj().T @ v - np.eye(2 * dim)).max() < 1e-10
    assert np.abs(ck @ v - v * b.eigenvalues).max() < 1e-10
    assert np.all((b.phases > -np.pi) & (b.phases <= np.pi))
    rec = (v * b.eigenvalues) @ v.conj().T
    assert np.abs(rec - ck).max() < 1e-10


def test_initial_weights_basis_vectors(grover):
    b = eigensystem(momentum_coin(grover, [0.3, 1.1]))
    assert np.allclose(initial_weights(b, b.vectors[:, 0]), [1, 0, 0, 0], atol=1e-12)
    f = initial_weights(b, (b.vectors[:, 0] + b.vectors[:, 1]) / np.sqrt(2))
    assert np.allclose(np.abs(f[:2]) ** 2, 0.5, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_parseval_and_propagation(seed):
    rng = np.random.default_rng(seed)
    coin = random_coin(2, rng)
    k = rng.uniform(-np.pi, np.pi, 2)
    ck = momentum_coin(coin, k)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    b = eigensystem(ck, k)
    f = initial_weights(b, psi)
    assert abs(np.sum(np.abs(f) ** 2) - np.vdot(psi, psi).real) < 1e-12 * np.vdot(psi, psi).real
    bw = b.with_weights(f)
    assert np.abs(propagate_momentum(bw, 0) - psi).max() < 1e-12
    direct = psi.copy()
    for t in range(1, 101):
        direct = ck @ direct
    assert np.abs(propagate_momentum(bw, 100) - direct).max() < 1e-10
    assert abs(np.linalg.norm(propagate_momentum(bw, 37)) - np.linalg.norm(psi)) < 1e-12


def test_propagate_eigenvector_and_five_steps(grover, rng):
    k = rng.uniform(-np.pi, np.pi, 2)
    ck = momentum_coin(grover, k)
    b = eigensystem(ck, k)
    phi = b.vectors[:, 2]
    out = propagate_momentum(b.with_weights(initial_weights(b, phi)), 9)
    assert np.abs(out - np.exp(-9j * b.phases[2]) * phi).max() < 1e-12
    psi = np.array([1, 1j, -1, 0.5]) / np.linalg.norm([1, 1, 1, 0.5])
    assert np.abs(propagate_momentum(b.with_weights(initial_weights(b, psi)), 5) - np.linalg.matrix_power(ck, 5) @ psi).max() < 1e-10


def test_propagate_needs_weights(grover):
    with pytest.raises(InvalidInputError):
        propagate_momentum(eigensystem(momentum_coin(grover, [0.1, 0.2])), 3)


def test_dft_delta_at_origin(rng):
    v = np.array([0.6, 0.8j, 0, 0])
    state = WalkerState.localized(v)
    out = dft_forward(state, rng.uniform(-np.pi, np.pi, (10, 2)))
    assert np.allclose(out, v, atol=1e-15)


def test_dft_plane_wave_peaks_at_k0():
    k0 = 0.9
    x = np.arange(-40, 41)
    amps = np.exp(1j * k0 * x)[:, None] * np.array([1.0, 0.0])
    state = WalkerState(amps, [-40])
    nodes = grid_nodes_1d(256)
    mag = np.abs(dft_forward(state, nodes[:, None])[:, 0])
    assert abs(nodes[np.argmax(mag)] - k0) < 2 * np.pi / 256


def test_dft_empty_state():
    with pytest.raises(InvalidInputError):
        dft_forward(WalkerState(np.zeros((0, 2)), [0]), [0.0])


def test_dft_grid_matches_direct(rng):
    amps = rng.normal(size=(7, 5, 4)) + 1j * rng.normal(size=(7, 5, 4))
    state = WalkerState(amps, [-3, 2])
    for m in (4, 8):
        f = dft_forward_grid(state, m)
        nodes = grid_nodes_1d(m)
        kk = np.stack(np.meshgrid(nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 2)
        assert np.abs(f.reshape(-1, 4) - dft_forward(state, kk)).max() < 1e-12


def test_dft_round_trip_gaussian():
    state = gaussian_position_amplitudes(SeparableGaussianIC(3.0, (0.4, -0.2), BlochPoint(1.0, 0.5)))
    f = dft_forward_grid(state, 128)
    back = dft_inverse_box(f, state.origin, state.shape)
    assert np.abs(back - state.amplitudes).max() < 1e-8
    x = np.array([[0, 0], [3, -5], [-24, 24]])
    direct = np.array([state.amplitude(p) for p in x])
    assert np.abs(dft_inverse(f, x) - direct).max() < 1e-8


def test_dft_inverse_shape_check():
    with pytest.raises(InvalidInputError):
        dft_inverse(np.zeros((8, 8, 3)), [0, 0])
