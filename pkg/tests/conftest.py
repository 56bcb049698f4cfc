import numpy as np
import pytest

from qllg import HamiltonianSpec, InitialStateSpec, LatticeSpec, QllgContext, build_initial_state
from qllg.spin_model import hamiltonian_from_spec

# criterion label -> list of (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record_acceptance(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in ACCEPTANCE:
        parts = ACCEPTANCE[criterion]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(("" if ok else "[fail] ") + d for ok, d in parts)
        terminalreporter.write_line(f"{criterion} {verdict}: {details}")


def random_density(N, rng, rank=None):
    rank = N if rank is None else rank
    G = rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_hermitian(N, rng, scale=1.0):
    A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * 0.5 * (A + A.conj().T)


def random_unitary(N, rng):
    Z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def pair_spec(J=1.0):
    """The two-spin benchmark: J, D_12 = 0.4 z_hat meV, B = 1 T along x."""
    return HamiltonianSpec(
        J=J, dmi_magnitude=0.4, dmi_mode="z_aligned", B=(1.0, 0.0, 0.0), lattice=LatticeSpec(geometry="pair")
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pair_problem():
    H, ops, bonds = hamiltonian_from_spec(pair_spec())
    ctx = QllgContext(H, 0.5)
    rho0 = build_initial_state(InitialStateSpec((0, 1, 0, 0, 0)), 2)
    return ctx, rho0, ops
