"""Expectation values, magnetisation and two-spin concurrence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, NonNegligibleImaginaryPart
from .linalg import (
    PAULI_Y,
    as_square,
    hermitian_eigendecomposition,
    hermitize,
    partial_trace,
)
from .spin_model import SpinOperators

IMAG_ATOL = 1e-9
IMAG_RTOL = 1e-11
# eigenvalues of a reduced state below this fraction of the largest one are
# eigensolver noise and are treated as exact zeros
CONCURRENCE_RANK_RTOL = 1e-14

_YY = np.kron(PAULI_Y, PAULI_Y)


def expectation(A, rho) -> float:
    """Tr(A rho) for Hermitian A; the imaginary part must be negligible."""
    A = as_square(A, "A")
    rho = as_square(rho, "rho")
    if A.shape != rho.shape:
        raise DimensionMismatch(f"A {A.shape} and rho {rho.shape} differ")
    val = np.einsum("ij,ji->", A, rho)
    if abs(val.imag) > max(IMAG_ATOL, IMAG_RTOL * abs(val.real)):
        raise NonNegligibleImaginaryPart(f"<A> has imaginary part {val.imag:.3e}")
    return float(val.real)


def magnetization(rho, ops: SpinOperators, axis: str) -> float:
    """<M_axis> with M_v = (1/n) sum_i S_i^v, in meV ps."""
    return expectation(ops.total(axis), rho) / ops.n


def spin_flip(rho2) -> np.ndarray:
    """(sigma_y x sigma_y) conj(rho) (sigma_y x sigma_y)."""
    rho2 = as_square(rho2, "rho2")
    if rho2.shape != (4, 4):
        raise DimensionMismatch(f"spin flip needs a 4x4 matrix, got {rho2.shape}")
    return _YY @ rho2.conj() @ _YY


def concurrence(rho2) -> float:
    """Wootters concurrence of a two-qubit state.

    With rho = W W* (W = V sqrt(Lambda)), the square roots of the eigenvalues
    of rho rho~ are the singular values of tau = W^T (sigma_y x sigma_y) W.
    Taking them from an SVD avoids the square root of near-zero eigenvalues,
    which would cost half the digits on rank-deficient states. For the same
    reason eigenvalues of rho below ``CONCURRENCE_RANK_RTOL`` times the
    largest are set to zero: a noise eigenvalue of 1e-18 would otherwise
    shift C by about 1e-9.
    Inputs with negative eigenvalues (e.g. iterates of a non-conservative
    integrator) are evaluated on the clipped spectrum and clamped to [0, 1];
    for genuine density matrices a value above 1 + 1e-10 is an error.
    """
    rho2 = as_square(rho2, "rho2")
    if rho2.shape != (4, 4):
        raise DimensionMismatch(f"concurrence needs a 4x4 matrix, got {rho2.shape}")
    dec = hermitian_eigendecomposition(hermitize(rho2))
    lam = dec.eigenvalues.copy()
    lam[lam <= CONCURRENCE_RANK_RTOL * max(lam[-1], 0.0)] = 0.0
    W = dec.eigenvectors * np.sqrt(lam)
    sv = np.linalg.svd(W.T @ _YY @ W, compute_uv=False)
    c = sv[0] - sv[1] - sv[2] - sv[3]
    if c > 1.0 + 1e-10 and dec.eigenvalues[0] >= -1e-10:
        raise InputError(f"concurrence {c:.12g} exceeds 1")
    return float(min(max(c, 0.0), 1.0))


def two_spin_concurrence(rho, n: int, k: int, l: int) -> float:
    return concurrence(partial_trace(rho, n, (k, l)))


@dataclass(frozen=True)
class ObservableSpec:
    """One sampled quantity: ``energy``, ``magnetization_<v>``,
    ``concurrence`` of sites (k, l), or ``trace_power`` m."""

    kind: str
    sites: tuple[int, int] | None = None
    power: int | None = None

    def __post_init__(self):
        if self.kind in ("energy", "magnetization_x", "magnetization_y", "magnetization_z"):
            return
        if self.kind == "concurrence":
            if self.sites is None or len(self.sites) != 2 or not 1 <= self.sites[0] < self.sites[1]:
                raise InputError(f"concurrence needs sites (k, l) with 1 <= k < l, got {self.sites}")
            return
        if self.kind == "trace_power":
            if self.power not in (1, 2, 3):
                raise InputError(f"trace_power needs m in {{1, 2, 3}}, got {self.power}")
            return
        raise InputError(f"unknown observable {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ObservableSpec":
        """From ``energy``, ``magnetization_z``, ``concurrence_1_2``, ``trace_power_2``."""
        if text.startswith("concurrence_"):
            parts = text.split("_")[1:]
            try:
                k, l = (int(p) for p in parts)
            except ValueError:
                raise InputError(f"malformed observable {text!r}") from None
            return cls("concurrence", sites=(k, l))
        if text.startswith("trace_power_"):
            try:
                m = int(text.rsplit("_", 1)[1])
            except ValueError:
                raise InputError(f"malformed observable {text!r}") from None
            return cls("trace_power", power=m)
        return cls(text)

    @property
    def column(self) -> str:
        if self.kind == "energy":
            return "energy_meV"
        if self.kind.startswith("magnetization_"):
            return "mag_" + self.kind[-1]
        if self.kind == "concurrence":
            return f"concurrence_{self.sites[0]}_{self.sites[1]}"
        return f"trace_power_{self.power}"

    def bind(self, H: np.ndarray, ops: SpinOperators):
        """A function rho -> float for this observable."""
        n = ops.n
        if self.kind == "energy":
            return lambda rho: expectation(H, rho)
        if self.kind.startswith("magnetization_"):
            axis = self.kind[-1]
            return lambda rho: magnetization(rho, ops, axis)
        if self.kind == "concurrence":
            k, l = self.sites
            if l > n:
                raise InputError(f"concurrence sites {self.sites} exceed n={n}")
            return lambda rho: two_spin_concurrence(rho, n, k, l)
        m = self.power
        return lambda rho: float(np.trace(np.linalg.matrix_power(rho, m)).real)
