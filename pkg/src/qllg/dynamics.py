"""Explicit right-hand side of the quantum LLG equation.

The equation

    rho' = (i/hbar) [rho, H] + i kappa [rho, rho']

is implicit in rho'. In the eigenbasis rho = V diag(lam) V* it becomes the
diagonal Sylvester equation (I + S) X - X S = D for X = V* rho' V, with
s_l = -i kappa lam_l and D = (i/hbar) V* [rho, H] V, which is solved entry by
entry: X_jl = D_jl / (1 + s_j - s_l). The denominators have real part 1 and
never vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, SingularDenominator
from .linalg import (
    SpectralDecomposition,
    as_square,
    check_hermitian,
    commutator,
    hermitian_eigendecomposition,
    hermitize,
)
from .spin_model import PhysicalConstants

DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True)
class QllgContext:
    """Hamiltonian (meV), dimensionless damping and hbar (meV ps)."""

    H: np.ndarray
    kappa: float = 0.5
    hbar: float = PhysicalConstants.hbar

    def __post_init__(self):
        object.__setattr__(self, "H", check_hermitian(self.H, "H"))
        if not math.isfinite(self.kappa):
            raise InputError(f"kappa must be finite, got {self.kappa}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise InputError(f"hbar must be positive, got {self.hbar}")

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def sylvester_diagonal_solve(s, D) -> np.ndarray:
    """Solve (I + diag(s)) X - X diag(s) = D by component-wise division."""
    s = np.asarray(s, dtype=complex)
    D = as_square(D, "D")
    if s.shape != (D.shape[0],):
        raise DimensionMismatch(f"s has shape {s.shape}, D has shape {D.shape}")
    den = 1.0 + s[:, None] - s[None, :]
    if np.min(np.abs(den)) <= DENOMINATOR_FLOOR:
        raise SingularDenominator("Sylvester denominator 1 + s_j - s_l vanished")
    return D / den


def qllg_rhs(rho, ctx: QllgContext, decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """f(rho) = V X V*, the time derivative of rho.

    ``decomposition`` may be supplied when the spectral decomposition of
    ``rho`` is already known (the conservative integrator builds its stage
    states from one); otherwise it is computed here.
    """
    rho = as_square(rho, "rho")
    if rho.shape != ctx.H.shape:
        raise DimensionMismatch(f"rho {rho.shape} and H {ctx.H.shape} differ")
    if ctx.kappa == 0.0:
        # X = D, so V X V* is the von Neumann term itself
        return hermitize((1j / ctx.hbar) * commutator(rho, ctx.H))

    if decomposition is None:
        decomposition = hermitian_eigendecomposition(rho)
    lam, V = decomposition.eigenvalues, decomposition.eigenvectors
    Vh = V.conj().T
    # V*[rho, H]V = diag(lam) H_e - H_e diag(lam) with H_e = V* H V
    H_e = hermitize(Vh @ ctx.H @ V)
    D = (1j / ctx.hbar) * (lam[:, None] - lam[None, :]) * H_e
    D = hermitize(D)
    X = sylvester_diagonal_solve(-1j * ctx.kappa * lam, D)
    return hermitize(V @ X @ Vh)


def implicit_residual(f, rho, ctx: QllgContext) -> float:
    """||f - (i/hbar)[rho,H] - i kappa [rho,f]||_F / max(1, ||f||_F)."""
    r = f - (1j / ctx.hbar) * commutator(rho, ctx.H) - 1j * ctx.kappa * commutator(rho, f)
    return float(np.linalg.norm(r) / max(1.0, np.linalg.norm(f)))


class QllgRhs:
    """Callable f(rho) bound to a context, for use with the integrators."""

    def __init__(self, ctx: QllgContext):
        self.ctx = ctx

    def __call__(self, rho) -> np.ndarray:
        return qllg_rhs(rho, self.ctx)

    def from_decomposition(self, rho, decomposition: SpectralDecomposition) -> np.ndarray:
        return qllg_rhs(rho, self.ctx, decomposition)
