"""Dense complex matrix primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
helpers here fix the conventions the rest of the package depends on:

* eigenvalues ascending, eigenvectors with a deterministic phase (largest
  magnitude entry of each column made real and non-negative);
* qubit ordering with site 1 as the most significant tensor factor, so the
  basis index of ``|b_1 b_2 ... b_n>`` is the binary number ``b_1 b_2 ... b_n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    IndexOutOfRange,
    InputError,
    NonConvergence,
    NotHermitian,
)

MAX_DIM = 4096

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def as_square(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def hermiticity_residual(A) -> float:
    """max_jk |A_jk - conj(A_kj)|."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def hermitize(A) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def check_hermitian(A, name="matrix", rtol=1e-12) -> np.ndarray:
    A = as_square(A, name)
    if not np.all(np.isfinite(A)):
        raise NonConvergence(f"{name} has non-finite entries")
    scale = max(1.0, float(np.linalg.norm(A)))
    res = hermiticity_residual(A)
    if res > rtol * scale:
        raise NotHermitian(f"{name} is not Hermitian (residual {res:.3e})")
    return A


def check_density_matrix(rho, name="rho") -> np.ndarray:
    """Validate Hermiticity, unit trace and (numerical) positivity."""
    rho = check_hermitian(rho, name)
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-12:
        raise InputError(f"{name} must have unit trace, got {tr.real:.15g}")
    lam_min = hermitian_eigenvalues(rho)[0]
    if lam_min < -1e-10:
        raise InputError(f"{name} is not positive semi-definite (min eigenvalue {lam_min:.3e})")
    return rho


@dataclass(frozen=True)
class SpectralDecomposition:
    """A = V diag(eigenvalues) V*, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return hermitize((V * self.eigenvalues) @ V.conj().T)


def _eigh(A, eigvals_only=False):
    if not np.all(np.isfinite(A)):
        raise NonConvergence("eigendecomposition of a matrix with non-finite entries")
    try:
        return scipy.linalg.eigh(A, eigvals_only=eigvals_only, driver="evr", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        return scipy.linalg.eigh(A, eigvals_only=eigvals_only, driver="evd", check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NonConvergence(f"Hermitian eigensolver failed: {exc}") from exc


def fix_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and >= 0.

    Ties go to the lowest row index (``argmax`` returns the first maximum).
    """
    idx = np.argmax(np.abs(V), axis=0)
    pivots = V[idx, np.arange(V.shape[1])]
    mag = np.abs(pivots)
    phase = np.ones_like(pivots)
    nz = mag > 0
    phase[nz] = pivots[nz].conj() / mag[nz]
    out = V * phase
    # the rotated pivot is |pivot| up to rounding; store it exactly
    out[idx, np.arange(V.shape[1])] = mag
    return out


def hermitian_eigendecomposition(A) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with deterministic output.

    Eigenvalues are sorted ascending with a stable sort (ties keep the
    solver's order) and eigenvector phases follow :func:`fix_phases`.

    Raises
    ------
    NotHermitian
        If ``A`` is not Hermitian to ``1e-12`` relative Frobenius scale.
    NonConvergence
        If the eigensolver fails or ``A`` holds NaN/Inf.
    """
    A = as_square(A)
    if not np.all(np.isfinite(A)):
        raise NonConvergence("eigendecomposition of a matrix with non-finite entries")
    check_hermitian(A)
    w, V = _eigh(A)
    order = np.argsort(w, kind="stable")
    w = np.ascontiguousarray(w[order])
    V = fix_phases(V[:, order])
    return SpectralDecomposition(w, V)


def hermitian_eigenvalues(A) -> np.ndarray:
    """Ascending eigenvalues only (same solver, no vectors)."""
    A = as_square(A)
    return np.sort(_eigh(A, eigvals_only=True))


def kron(A, B, max_dim=MAX_DIM) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionOverflow(f"tensor product of dimension {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(A, B)


def kron_all(factors: Sequence[np.ndarray], max_dim=MAX_DIM) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for F in factors:
        out = kron(out, F, max_dim)
    return out


def commutator(A, B) -> np.ndarray:
    """[A, B] = AB - BA."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.ndim != 2:
        raise DimensionMismatch(f"commutator of shapes {A.shape} and {B.shape}")
    return A @ B - B @ A


def num_sites(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


def reduced_state(rho, n: int, keep: Sequence[int]) -> np.ndarray:
    """Trace out every site not listed in ``keep`` (1-based, any order).

    The kept sites appear in the output in the order given.
    """
    rho = as_square(rho, "rho")
    if rho.shape[0] != 2**n:
        raise DimensionMismatch(f"rho has dim {rho.shape[0]}, expected 2**{n}")
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep) or any(k < 1 or k > n for k in keep):
        raise IndexOutOfRange(f"sites {keep} invalid for n={n}")
    kept = [k - 1 for k in keep]
    traced = [s for s in range(n) if s not in kept]
    T = rho.reshape([2] * (2 * n))
    perm = kept + traced + [n + s for s in kept] + [n + s for s in traced]
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    T = T.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", T)


def partial_trace(rho, n: int, keep: tuple[int, int]) -> np.ndarray:
    """Reduced two-site density matrix of sites ``keep = (k, l)``, 1 <= k < l <= n."""
    k, l = keep
    if not (1 <= k < l <= n):
        raise IndexOutOfRange(f"need 1 <= k < l <= n, got ({k}, {l}) with n={n}")
    return reduced_state(rho, n, (k, l))


@dataclass(frozen=True)
class Diagnostics:
    trace: float
    trace_sq: float
    trace_cube: float
    min_eigenvalue: float
    hermiticity_residual: float

    def is_finite(self) -> bool:
        return all(np.isfinite([self.trace, self.trace_sq, self.trace_cube, self.min_eigenvalue]))


def diagnostics(rho) -> Diagnostics:
    rho = as_square(rho, "rho")
    if not np.all(np.isfinite(rho)):
        nan = float("nan")
        return Diagnostics(nan, nan, nan, nan, nan)
    rho2 = rho @ rho
    return Diagnostics(
        trace=float(np.trace(rho).real),
        trace_sq=float(np.trace(rho2).real),
        trace_cube=float(np.einsum("ij,ji->", rho2, rho).real),
        min_eigenvalue=float(hermitian_eigenvalues(hermitize(rho))[0]),
        hermiticity_residual=hermiticity_residual(rho),
    )
