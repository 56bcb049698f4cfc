import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from qllg.errors import DimensionMismatch, DimensionOverflow, IndexOutOfRange, NonConvergence, NotHermitian
from qllg.linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    commutator,
    diagnostics,
    hermitian_eigendecomposition,
    kron,
    partial_trace,
    reduced_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_eig_identity():
    dec = hermitian_eigendecomposition(np.eye(2))
    np.testing.assert_array_equal(dec.eigenvalues, [1.0, 1.0])
    np.testing.assert_allclose(dec.eigenvectors, np.eye(2), atol=1e-15)


def test_eig_sigma_z_ascending():
    dec = hermitian_eigendecomposition(PAULI_Z)
    np.testing.assert_allclose(dec.eigenvalues, [-1.0, 1.0])
    np.testing.assert_allclose(dec.eigenvectors[:, 0], [0, 1], atol=1e-15)
    np.testing.assert_allclose(dec.eigenvectors[:, 1], [1, 0], atol=1e-15)


@pytest.mark.parametrize("N", [1, 2, 8, 33, 128, 256])
def test_eig_reconstruction_and_unitarity(N, rng):
    A = random_hermitian(N, rng)
    dec = hermitian_eigendecomposition(A)
    V, lam = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm(V @ V.conj().T - np.eye(N)) <= 1e-11 * N
    scale = max(1.0, np.linalg.norm(A))
    assert np.linalg.norm(dec.reconstruct() - A) <= 1e-11 * scale
    if N == 8:
        assert np.linalg.norm(dec.reconstruct() - A) / np.linalg.norm(A) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 24))
def test_eig_phase_convention(seed, N):
    A = random_hermitian(N, np.random.default_rng(seed))
    V = hermitian_eigendecomposition(A).eigenvectors
    for col in V.T:
        pivot = col[np.argmax(np.abs(col))]
        assert abs(pivot.imag) == 0.0
        assert pivot.real >= 0.0


def test_eig_deterministic(rng):
    A = random_hermitian(64, rng)
    d1 = hermitian_eigendecomposition(A.copy())
    d2 = hermitian_eigendecomposition(A.copy())
    assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
    assert np.array_equal(d1.eigenvectors, d2.eigenvectors)


def test_eig_degenerate_rank_one(rng):
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    dec = hermitian_eigendecomposition(rho)
    assert abs(dec.eigenvalues[-1] - 1) < 1e-14
    assert np.max(np.abs(dec.eigenvalues[:-1])) < 1e-14
    assert np.linalg.norm(dec.reconstruct() - rho) < 1e-13


def test_eig_errors():
    with pytest.raises(NotHermitian):
        hermitian_eigendecomposition(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NonConvergence):
        hermitian_eigendecomposition(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(DimensionMismatch):
        hermitian_eigendecomposition(np.zeros((2, 3)))


def test_kron_basic():
    K = kron(np.eye(2), PAULI_X)
    np.testing.assert_array_equal(K[:2, :2], PAULI_X)
    np.testing.assert_array_equal(K[2:, 2:], PAULI_X)
    np.testing.assert_array_equal(K[:2, 2:], 0)
    assert kron(np.eye(2), np.eye(4)).shape == (8, 8)


def test_kron_overflow():
    with pytest.raises(DimensionOverflow):
        kron(np.eye(64), np.eye(128))
    assert kron(np.eye(2), np.eye(4), max_dim=8).shape == (8, 8)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_kron_mixed_product_and_associativity(seed):
    rng = np.random.default_rng(seed)
    A, B, C, D = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
    lhs = kron(A, B) @ kron(C, D)
    assert np.max(np.abs(lhs - kron(A @ C, B @ D))) <= 1e-13 * max(1, np.max(np.abs(lhs)))
    np.testing.assert_allclose(kron(kron(A, B), C), kron(A, kron(B, C)), rtol=0, atol=1e-13)


def test_commutator_pauli():
    np.testing.assert_allclose(commutator(PAULI_X, PAULI_Y), 2j * PAULI_Z)
    A = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(commutator(A, A), 0)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_commutator_of_hermitians_is_skew(seed):
    rng = np.random.default_rng(seed)
    R = commutator(random_hermitian(4, rng), random_hermitian(4, rng))
    assert np.linalg.norm(R + R.conj().T) <= 1e-13 * max(np.linalg.norm(R), 1e-300)


def test_commutator_mismatch():
    with pytest.raises(DimensionMismatch):
        commutator(np.eye(2), np.eye(3))


def brute_partial_trace(rho, n, k, l):
    """Explicit summation over the traced bits, site 1 = most significant."""
    out = np.zeros((4, 4), dtype=complex)
    others = [s for s in range(1, n + 1) if s not in (k, l)]

    def index(bits):
        return sum(b << (n - s) for s, b in bits.items())

    for a, b, c, d in itertools.product((0, 1), repeat=4):
        total = 0j
        for env in itertools.product((0, 1), repeat=len(others)):
            e = dict(zip(others, env))
            i = index({**e, k: a, l: b})
            j = index({**e, k: c, l: d})
            total += rho[i, j]
        out[2 * a + b, 2 * c + d] = total
    return out


@pytest.mark.parametrize("n,keep", [(3, (1, 3)), (3, (1, 2)), (3, (2, 3)), (4, (2, 4)), (5, (1, 5))])
def test_partial_trace_matches_brute_force(n, keep, rng):
    rho = random_density(2**n, rng)
    out = partial_trace(rho, n, keep)
    np.testing.assert_allclose(out, brute_partial_trace(rho, n, *keep), rtol=0, atol=1e-13)
    assert abs(np.trace(out) - np.trace(rho)) <= 1e-13


def test_partial_trace_product_states(rng):
    ra, rb, rc = (random_density(2, rng) for _ in range(3))
    np.testing.assert_allclose(partial_trace(np.kron(ra, rb), 2, (1, 2)), np.kron(ra, rb), atol=1e-15)
    full = np.kron(np.kron(ra, rb), rc)
    np.testing.assert_allclose(partial_trace(full, 3, (1, 2)), np.kron(ra, rb), atol=1e-14)
    np.testing.assert_allclose(partial_trace(full, 3, (1, 3)), np.kron(ra, rc), atol=1e-14)


def test_single_site_of_bell_is_maximally_mixed():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(phi, phi)
    np.testing.assert_allclose(reduced_state(rho, 2, [1]), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(reduced_state(rho, 2, [2]), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_index_errors():
    rho = np.eye(8) / 8
    for keep in [(2, 1), (0, 2), (1, 4), (2, 2)]:
        with pytest.raises(IndexOutOfRange):
            partial_trace(rho, 3, keep)
    with pytest.raises(DimensionMismatch):
        partial_trace(rho, 2, (1, 2))


def test_diagnostics_values():
    d = diagnostics(np.eye(4) / 4)
    assert d.trace == pytest.approx(1.0, abs=1e-15)
    assert d.trace_sq == pytest.approx(0.25, abs=1e-15)
    assert d.min_eigenvalue == pytest.approx(0.25, abs=1e-15)
    assert d.hermiticity_residual == 0.0

    psi = np.array([1, 1j, 0, 1]) / np.sqrt(3)
    assert abs(diagnostics(np.outer(psi, psi.conj())).trace_sq - 1) <= 1e-12

    d = diagnostics(np.diag([0.5, 0.3, 0.2, 0.0]))
    assert d.trace_cube == pytest.approx(0.5**3 + 0.3**3 + 0.2**3, abs=1e-15)
    assert d.trace_cube == pytest.approx(0.16, abs=1e-15)
