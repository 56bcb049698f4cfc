"""Explicit Runge-Kutta stepping for matrix ODEs, with an isospectral variant.

The standard scheme keeps Hermiticity and trace but lets the spectrum drift,
so iterates can acquire negative eigenvalues. The conservative scheme projects
every stage state and the combined update back onto the set of Hermitian
matrices with the spectrum of rho_0: eigendecompose, keep the eigenvectors,
substitute the reference eigenvalues (both sorted ascending).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .dynamics import QllgContext, QllgRhs
from .errors import InputError, NumericalBlowup, NumericalError, UnknownTableau
from .linalg import (
    Diagnostics,
    SpectralDecomposition,
    check_hermitian,
    diagnostics,
    hermitian_eigendecomposition,
    hermitian_eigenvalues,
    hermitize,
)

log = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]

BLOWUP_NORM = 1e6


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit RK coefficients. ``a`` is strictly lower triangular."""

    a: np.ndarray
    b: np.ndarray
    nominal_order: int
    name: str = ""

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        s = b.shape[0]
        if a.shape != (s, s):
            raise InputError(f"a must be {s}x{s}, got {a.shape}")
        if np.any(np.triu(a) != 0.0):
            raise InputError("a must be strictly lower triangular for an explicit method")
        if abs(b.sum() - 1.0) > 1e-14:
            raise InputError(f"weights must sum to 1, got {b.sum()!r}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def stages(self) -> int:
        return self.b.shape[0]


_PRESETS = {
    "euler": ([[0.0]], [1.0], 1),
    # Heun
    "rk2": ([[0, 0], [1, 0]], [1 / 2, 1 / 2], 2),
    # Kutta's third-order rule
    "rk3": ([[0, 0, 0], [1 / 2, 0, 0], [-1, 2, 0]], [1 / 6, 2 / 3, 1 / 6], 3),
    "rk4": (
        [[0, 0, 0, 0], [1 / 2, 0, 0, 0], [0, 1 / 2, 0, 0], [0, 0, 1, 0]],
        [1 / 6, 1 / 3, 1 / 3, 1 / 6],
        4,
    ),
}

TABLEAU_NAMES = tuple(_PRESETS)


def preset_tableau(name: str) -> ButcherTableau:
    try:
        a, b, order = _PRESETS[name]
    except KeyError:
        raise UnknownTableau(f"unknown tableau {name!r}; choose from {', '.join(_PRESETS)}") from None
    return ButcherTableau(np.array(a, dtype=float), np.array(b, dtype=float), order, name)


def reference_spectrum(rho0) -> np.ndarray:
    """Ascending eigenvalues of rho_0, validated as a density-matrix spectrum."""
    lam = hermitian_eigenvalues(check_hermitian(rho0, "rho0"))
    _check_spectrum(lam)
    return lam


def _check_spectrum(lam: np.ndarray):
    if lam[0] < -1e-10:
        raise InputError(f"reference spectrum has negative entry {lam[0]:.3e}")
    if abs(lam.sum() - 1.0) > 1e-10:
        raise InputError(f"reference spectrum sums to {lam.sum():.15g}, not 1")
    if np.any(np.diff(lam) < 0):
        raise InputError("reference spectrum must be sorted ascending")


def _assemble(V: np.ndarray, lam: np.ndarray) -> np.ndarray:
    nz = lam != 0.0
    W = V[:, nz]
    return hermitize((W * lam[nz]) @ W.conj().T)


def _project(z, lambda0: np.ndarray) -> tuple[np.ndarray, SpectralDecomposition]:
    dec = hermitian_eigendecomposition(z)
    if dec.dim != lambda0.shape[0]:
        raise InputError(f"reference spectrum has {lambda0.shape[0]} entries for a {dec.dim}-dim state")
    V = dec.eigenvectors
    return _assemble(V, lambda0), SpectralDecomposition(lambda0, V)


def spectral_projection(z_tilde, lambda0) -> np.ndarray:
    """Replace the eigenvalues of ``z_tilde`` by ``lambda0``, pairing by rank."""
    lambda0 = np.asarray(lambda0, dtype=float)
    return _project(z_tilde, lambda0)[0]


def _eval(rhs: Rhs, z, dec: SpectralDecomposition | None):
    if dec is not None and isinstance(rhs, QllgRhs):
        return rhs.from_decomposition(z, dec)
    return rhs(z)


def rk_step(rho_k, h: float, tableau: ButcherTableau, rhs: Rhs) -> np.ndarray:
    """One explicit RK step."""
    if not h > 0:
        raise InputError(f"step size must be positive, got {h}")
    a, b = tableau.a, tableau.b
    k = []
    for l in range(tableau.stages):
        z = rho_k
        for j in range(l):
            if a[l, j] != 0.0:
                z = z + (h * a[l, j]) * k[j]
        k.append(rhs(z))
    out = rho_k
    for j, bj in enumerate(b):
        if bj != 0.0:
            out = out + (h * bj) * k[j]
    return out


def _conservative_step(rho_k, h, tableau, lambda0, rhs, dec_k=None):
    a, b = tableau.a, tableau.b
    k = [_eval(rhs, rho_k, dec_k)]
    for l in range(1, tableau.stages):
        z = rho_k
        for j in range(l):
            if a[l, j] != 0.0:
                z = z + (h * a[l, j]) * k[j]
        z, dec = _project(z, lambda0)
        k.append(_eval(rhs, z, dec))
    out = rho_k
    for j, bj in enumerate(b):
        if bj != 0.0:
            out = out + (h * bj) * k[j]
    return _project(out, lambda0)


def conservative_rk_step(rho_k, h: float, tableau: ButcherTableau, lambda0, rhs: Rhs) -> np.ndarray:
    """One isospectral RK step.

    Stage states z_2..z_s and the combined update are projected onto the
    spectrum ``lambda0``; z_1 = rho_k is used as given.
    """
    if not h > 0:
        raise InputError(f"step size must be positive, got {h}")
    lambda0 = np.asarray(lambda0, dtype=float)
    _check_spectrum(lambda0)
    return _conservative_step(rho_k, h, tableau, lambda0, rhs)[0]


@dataclass(frozen=True)
class IntegratorConfig:
    tableau: ButcherTableau
    conservative: bool = True
    h: float = 0.02
    t_final: float = 1.0
    sample_stride: int = 1

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InputError(f"h must be positive, got {self.h}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise InputError(f"t_final must be >= 0, got {self.t_final}")
        if self.t_final != 0 and self.h > self.t_final:
            raise InputError(f"h = {self.h} exceeds t_final = {self.t_final}")
        if int(self.sample_stride) < 1:
            raise InputError(f"sample_stride must be >= 1, got {self.sample_stride}")

    def step_times(self) -> np.ndarray:
        """Grid 0, h, 2h, ..., with a shortened last step landing on t_final."""
        if self.t_final == 0:
            return np.zeros(1)
        m = int(math.floor(self.t_final / self.h + 1e-9))
        times = self.h * np.arange(m + 1)
        if self.t_final - times[-1] > 1e-12 * max(1.0, self.t_final):
            times = np.append(times, self.t_final)
        else:
            times[-1] = self.t_final
        return times


@dataclass
class TrajectoryRecord:
    times: list[float] = field(default_factory=list)
    diagnostics: list[Diagnostics] = field(default_factory=list)
    observables: dict[str, list[float]] = field(default_factory=dict)
    final_state: np.ndarray | None = None
    steps: int = 0

    def sample(self, t: float, rho: np.ndarray, observers: Mapping[str, Callable]):
        self.times.append(float(t))
        self.diagnostics.append(diagnostics(rho))
        for name, fn in observers.items():
            self.observables.setdefault(name, []).append(float(fn(rho)))

    def column(self, name: str) -> np.ndarray:
        """Observable or diagnostic series by name (``trace``, ``trace_sq``, ...)."""
        if name in self.observables:
            return np.asarray(self.observables[name])
        return np.array([getattr(d, name) for d in self.diagnostics])


def _blown_up(rho) -> bool:
    return not np.all(np.isfinite(rho)) or np.linalg.norm(rho) > BLOWUP_NORM


def integrate(
    rho0,
    ctx: QllgContext,
    config: IntegratorConfig,
    observers: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    rhs: Rhs | None = None,
) -> TrajectoryRecord:
    """Drive ``rho0`` to ``config.t_final`` with fixed steps.

    Observers are sampled, together with the diagnostics, at t=0, every
    ``sample_stride`` steps, and always at the final time. On a numerical
    failure the exception carries the partial record in ``exc.record``.
    """
    observers = dict(observers or {})
    rhs = rhs if rhs is not None else QllgRhs(ctx)
    rho = hermitize(check_hermitian(rho0, "rho0"))
    times = config.step_times()
    record = TrajectoryRecord()
    record.sample(times[0], rho, observers)

    lambda0 = dec = None
    if config.conservative:
        dec = hermitian_eigendecomposition(rho)
        lambda0 = dec.eigenvalues.copy()
        _check_spectrum(lambda0)

    n_steps = len(times) - 1
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        try:
            if config.conservative:
                rho, dec = _conservative_step(rho, h, config.tableau, lambda0, rhs, dec)
            else:
                rho = rk_step(rho, h, config.tableau, rhs)
        except NumericalError as exc:
            record.final_state = rho
            exc.record = record
            raise
        record.steps = k + 1
        if _blown_up(rho):
            record.final_state = rho
            raise NumericalBlowup(f"state blew up at t={times[k + 1]:.6g} ps", record)
        if (k + 1) % config.sample_stride == 0 or k + 1 == n_steps:
            record.sample(times[k + 1], rho, observers)
            if not record.diagnostics[-1].is_finite():
                record.final_state = rho
                raise NumericalBlowup(f"non-finite diagnostics at t={times[k + 1]:.6g} ps", record)
    record.final_state = rho
    return record
