"""Independent references used to check the solver.

* :func:`exact_rank1_solution` -- closed form for pure initial states,
  rho(t) = E rho0 E^* / Tr(E rho0 E^*), E = exp(-(i/hbar) H~ t),
  H~ = (1 - i kappa) / (1 + kappa^2) H.
* :func:`brute_force_rhs` -- solves the implicit equation for rho' as one
  N^2 x N^2 linear system, without any eigendecomposition of rho.
* :func:`convergence_study` -- error against a reference for a list of step
  sizes, with least-squares and pairwise observed orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import QllgContext
from .errors import DimensionOverflow, InputError, NotRankOne, SingularSystem
from .integrators import IntegratorConfig, integrate, preset_tableau
from .linalg import as_square, commutator, hermitian_eigendecomposition, hermitize

BRUTE_FORCE_MAX_DIM = 64


class ExactRank1Solution:
    """rho(t) for a rank-1 rho0; H is diagonalised once and reused for every t."""

    def __init__(self, rho0, ctx: QllgContext):
        rho0 = as_square(rho0, "rho0")
        dec = hermitian_eigendecomposition(hermitize(rho0))
        lam = dec.eigenvalues
        if lam.shape[0] > 1 and lam[-2] > 1e-10:
            raise NotRankOne(f"rho0 has second-largest eigenvalue {lam[-2]:.3e}")
        self.rho0 = rho0
        self.psi0 = dec.eigenvectors[:, -1]
        self.ctx = ctx
        hdec = hermitian_eigendecomposition(ctx.H)
        # shifting the energies only rescales E; the normalisation removes it
        self.energies = hdec.eigenvalues - hdec.eigenvalues[0]
        self.VH = hdec.eigenvectors
        self.c0 = self.VH.conj().T @ self.psi0
        self.scale = (1.0 - 1j * ctx.kappa) / (1.0 + ctx.kappa**2)

    def state_vector(self, t: float) -> np.ndarray:
        phases = np.exp(-1j / self.ctx.hbar * self.scale * self.energies * t)
        psi = self.VH @ (phases * self.c0)
        return psi / np.linalg.norm(psi)

    def __call__(self, t: float) -> np.ndarray:
        if t == 0:
            return self.rho0.copy()
        psi = self.state_vector(t)
        return hermitize(np.outer(psi, psi.conj()))


def exact_rank1_solution(rho0, ctx: QllgContext, t: float) -> np.ndarray:
    return ExactRank1Solution(rho0, ctx)(t)


def brute_force_rhs(rho, ctx: QllgContext) -> np.ndarray:
    """Solve f - i kappa [rho, f] = (i/hbar)[rho, H] as a dense linear system.

    With column-stacking vec, vec(rho f) = (I x rho) vec f and
    vec(f rho) = (rho^T x I) vec f.
    """
    rho = as_square(rho, "rho")
    N = rho.shape[0]
    if N > BRUTE_FORCE_MAX_DIM:
        raise DimensionOverflow(f"brute-force system of size {N * N} is too large")
    I = np.eye(N)
    M = np.eye(N * N) - 1j * ctx.kappa * (np.kron(I, rho) - np.kron(rho.T, I))
    rhs = ((1j / ctx.hbar) * commutator(rho, ctx.H)).reshape(-1, order="F")
    try:
        f = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    return hermitize(f.reshape(N, N, order="F"))


CONSERVED_TOL = 1e-12


@dataclass
class MethodResult:
    method: str
    conservative: bool
    errors: list[float]
    slope: float | None
    pairwise_orders: list[float | None]
    conserved: bool = False

    @property
    def label(self) -> str:
        return ("conservative-" if self.conservative else "") + self.method


@dataclass
class ConvergenceReport:
    h_list: list[float]
    t_final: float
    reference: str
    results: list[MethodResult] = field(default_factory=list)

    def result(self, method: str, conservative: bool = True) -> MethodResult:
        for r in self.results:
            if r.method == method and r.conservative == conservative:
                return r
        raise KeyError((method, conservative))


def fit_slope(h_list: Sequence[float], errors: Sequence[float]) -> float | None:
    """Least-squares slope of log(error) against log(h); None with < 2 points."""
    if len(h_list) < 2 or min(errors) <= 0:
        return None
    x = np.log(np.asarray(h_list, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def pairwise_orders(h_list, errors) -> list[float | None]:
    out: list[float | None] = [None]
    for k in range(1, len(h_list)):
        e0, e1 = errors[k - 1], errors[k]
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(h_list[k - 1] / h_list[k]))
        else:
            out.append(None)
    return out


def convergence_study(
    rho0,
    ctx: QllgContext,
    methods: Sequence[tuple[str, bool]],
    h_list: Sequence[float],
    t_final: float,
    reference: str = "exact_rank1",
) -> ConvergenceReport:
    """Final-time Frobenius errors for each (tableau name, conservative) pair.

    ``reference`` is ``"exact_rank1"`` (pure rho0 only) or ``"fine_rk4"``,
    conservative RK4 with step ``min(h_list) / 10``.
    """
    h_list = [float(h) for h in h_list]
    if not h_list:
        raise InputError("h_list is empty")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise InputError("h_list must be strictly decreasing")
    if reference == "exact_rank1":
        ref = ExactRank1Solution(rho0, ctx)(t_final)
    elif reference == "fine_rk4":
        cfg = IntegratorConfig(preset_tableau("rk4"), True, min(h_list) / 10, t_final, sample_stride=10**9)
        ref = integrate(rho0, ctx, cfg).final_state
    else:
        raise InputError(f"unknown reference {reference!r}")

    report = ConvergenceReport(h_list, t_final, reference)
    for name, conservative in methods:
        tableau = preset_tableau(name)
        errors = []
        for h in h_list:
            cfg = IntegratorConfig(tableau, conservative, h, t_final, sample_stride=10**9)
            rho = integrate(rho0, ctx, cfg).final_state
            errors.append(float(np.linalg.norm(rho - ref)))
        conserved = all(e <= CONSERVED_TOL for e in errors)
        slope = None if conserved else fit_slope(h_list, errors)
        report.results.append(
            MethodResult(name, conservative, errors, slope, pairwise_orders(h_list, errors), conserved)
        )
    return report
