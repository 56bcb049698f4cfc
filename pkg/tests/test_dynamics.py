import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from qllg.dynamics import QllgContext, QllgRhs, implicit_residual, qllg_rhs, sylvester_diagonal_solve
from qllg.errors import DimensionMismatch, InputError, NotHermitian, SingularDenominator
from qllg.linalg import commutator, hermitian_eigendecomposition
from qllg.oracle import ExactRank1Solution, brute_force_rhs

seeds = st.integers(min_value=0, max_value=2**32 - 1)
kappas = st.sampled_from([0.0, 0.1, 0.5, 2.0])


def problem(seed, N, kappa, rank=None):
    rng = np.random.default_rng(seed)
    return QllgContext(random_hermitian(N, rng, scale=3.0), kappa), random_density(N, rng, rank)


def test_sylvester_identity(rng):
    s = -1j * 0.7 * rng.random(6)
    D = random_hermitian(6, rng)
    X = sylvester_diagonal_solve(s, D)
    S = np.diag(s)
    np.testing.assert_allclose((np.eye(6) + S) @ X - X @ S, D, atol=1e-14)


def test_sylvester_singular_and_shape():
    with pytest.raises(SingularDenominator):
        sylvester_diagonal_solve(np.array([0.0, 1.0]), np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        sylvester_diagonal_solve(np.zeros(3), np.ones((2, 2)))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 16), kappas)
def test_rhs_solves_implicit_equation(seed, N, kappa):
    ctx, rho = problem(seed, N, kappa)
    f = qllg_rhs(rho, ctx)
    assert implicit_residual(f, rho, ctx) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8), kappas, st.integers(1, 8))
def test_rhs_matches_dense_linear_solve(seed, N, kappa, rank):
    ctx, rho = problem(seed, N, kappa, min(rank, N))
    f = qllg_rhs(rho, ctx)
    ref = brute_force_rhs(rho, ctx)
    assert np.linalg.norm(f - ref) <= 1e-12 * max(1.0, np.linalg.norm(ref))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 12), kappas)
def test_rhs_structure(seed, N, kappa):
    """f is Hermitian, and Tr(rho^m f) = 0, so traces of powers are constant."""
    ctx, rho = problem(seed, N, kappa)
    f = qllg_rhs(rho, ctx)
    assert np.array_equal(f, f.conj().T)
    scale = max(1.0, np.linalg.norm(f))
    P = np.eye(N)
    for _ in range(4):
        assert abs(np.trace(P @ f)) <= 1e-12 * scale
        P = P @ rho


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 10), st.sampled_from([0.1, 0.5, 2.0]))
def test_energy_is_dissipated(seed, N, kappa):
    ctx, rho = problem(seed, N, kappa)
    assert np.trace(ctx.H @ qllg_rhs(rho, ctx)).real <= 1e-12


def test_zero_damping_is_von_neumann(rng):
    ctx = QllgContext(random_hermitian(8, rng), 0.0)
    rho = random_density(8, rng)
    np.testing.assert_allclose(qllg_rhs(rho, ctx), (1j / ctx.hbar) * commutator(rho, ctx.H), atol=1e-14)
    assert abs(np.trace(ctx.H @ qllg_rhs(rho, ctx))) < 1e-12


def test_pure_state_matches_time_derivative_of_closed_form(rng):
    ctx = QllgContext(random_hermitian(6, rng), 0.5)
    rho0 = random_density(6, rng, rank=1)
    exact = ExactRank1Solution(rho0, ctx)
    t, dt = 0.3, 1e-4
    # fourth-order central difference
    deriv = (-exact(t + 2 * dt) + 8 * exact(t + dt) - 8 * exact(t - dt) + exact(t - 2 * dt)) / (12 * dt)
    f = qllg_rhs(exact(t), ctx)
    assert np.linalg.norm(f - deriv) <= 1e-7 * np.linalg.norm(f)


def test_supplied_decomposition_is_used(rng):
    ctx = QllgContext(random_hermitian(5, rng), 0.5)
    rho = random_density(5, rng)
    dec = hermitian_eigendecomposition(rho)
    rhs = QllgRhs(ctx)
    np.testing.assert_array_equal(rhs.from_decomposition(rho, dec), rhs(rho))


def test_maximally_mixed_state_is_stationary():
    ctx = QllgContext(np.diag([1.0, -2.0, 0.5, 3.0]), 0.5)
    assert np.max(np.abs(qllg_rhs(np.eye(4) / 4, ctx))) == 0.0


def test_context_validation():
    with pytest.raises(NotHermitian):
        QllgContext(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InputError):
        QllgContext(np.eye(2), float("nan"))
    with pytest.raises(InputError):
        QllgContext(np.eye(2), 0.5, hbar=0.0)
    with pytest.raises(DimensionMismatch):
        qllg_rhs(np.eye(3) / 3, QllgContext(np.eye(2)))
