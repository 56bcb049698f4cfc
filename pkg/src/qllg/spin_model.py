"""Spin-1/2 lattice Hamiltonians and initial states.

Sites are labelled 1..n, site 1 being the leftmost tensor factor. Energies are
in meV, times in ps, fields in tesla; spin operators carry the factor hbar/2
and so are in meV*ps.

The Hamiltonian is

    H = (2J/hbar^2) sum_<ij> S_i.S_j + (2/hbar^2) sum_<ij> D_ij.(S_i x S_j)
        - mu sum_i B.S_i,          mu = -mu_B g / hbar,

with each unordered bond ``<ij>`` (i < j) counted once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Literal, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    IndexOutOfRange,
    InvalidLattice,
    InvalidProbabilityVector,
)
from .linalg import MAX_DIM, PAULI, PAULI_I, check_hermitian, hermitize

AXES = ("x", "y", "z")
MAX_SITES = int(math.log2(MAX_DIM))


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 0.658  # meV ps
    mu_B: float = 5.8e-2  # meV / T
    g: float = 2.0

    @property
    def mu(self) -> float:
        """Gyromagnetic constant -mu_B g / hbar, in 1/(T ps)."""
        return -self.mu_B * self.g / self.hbar


@dataclass(frozen=True)
class LatticeSpec:
    """Site grid. ``geometry='pair'`` ignores rows/cols and gives two sites."""

    rows: int = 3
    cols: int = 3
    periodic: bool = True
    geometry: Literal["triangular", "pair"] = "triangular"

    def __post_init__(self):
        if self.geometry not in ("triangular", "pair"):
            raise InvalidLattice(f"unknown geometry {self.geometry!r}")
        if self.geometry == "triangular":
            if int(self.rows) < 1 or int(self.cols) < 1:
                raise InvalidLattice(f"rows and cols must be positive, got {self.rows}x{self.cols}")
            if self.n > MAX_SITES:
                raise InvalidLattice(f"{self.n} sites exceed the dense limit of {MAX_SITES}")

    @property
    def n(self) -> int:
        return 2 if self.geometry == "pair" else self.rows * self.cols

    def site(self, row: int, col: int) -> int:
        """1-based label of grid point (row, col), row-major."""
        return row * self.cols + col + 1


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    d_vector: tuple[float, float, float] = (0.0, 0.0, 0.0)


# Real-space lattice vectors chosen so that the three grid offsets
# (1,0), (0,1), (1,1) are all unit-length nearest-neighbour bonds.
_A1 = np.array([1.0, 0.0])
_A2 = np.array([-0.5, math.sqrt(3.0) / 2.0])
_OFFSETS = ((1, 0), (0, 1), (1, 1))  # (d_col, d_row)


def _dmi_vector(direction: np.ndarray, magnitude: float, mode: str, sign: int):
    if mode == "z_aligned":
        d = np.array([0.0, 0.0, 1.0])
    elif mode == "inplane_perp":
        # z_hat x (rx, ry, 0) = (-ry, rx, 0)
        r = direction / np.linalg.norm(direction)
        d = np.array([-r[1], r[0], 0.0])
    else:
        raise InvalidLattice(f"unknown dmi_mode {mode!r}")
    return tuple(float(x) for x in sign * magnitude * d)


def build_bonds(
    lattice: LatticeSpec,
    dmi_magnitude: float = 0.0,
    dmi_mode: str = "inplane_perp",
    dmi_sign: int = 1,
) -> list[Bond]:
    """Nearest-neighbour bonds with their DMI vectors.

    Each unordered pair is listed once with ``i < j``; the stored vector is
    ``D_ij`` for that orientation. For ``inplane_perp`` it is
    ``dmi_sign * |D| * (z_hat x r_ij)`` with ``r_ij`` the unit bond direction
    from i to j. Pairs reached twice through periodic wrapping on small grids
    are kept only at first encounter; self-bonds are dropped.
    """
    if dmi_magnitude < 0 or not math.isfinite(dmi_magnitude):
        raise InvalidLattice(f"dmi_magnitude must be finite and >= 0, got {dmi_magnitude}")
    if dmi_sign not in (1, -1):
        raise InvalidLattice(f"dmi_sign must be +1 or -1, got {dmi_sign}")
    if lattice.geometry == "pair":
        return [Bond(1, 2, _dmi_vector(_A1, dmi_magnitude, dmi_mode, dmi_sign))]

    bonds: list[Bond] = []
    seen: set[tuple[int, int]] = set()
    R, C = lattice.rows, lattice.cols
    for r in range(R):
        for c in range(C):
            for dc, dr in _OFFSETS:
                r2, c2 = r + dr, c + dc
                if lattice.periodic:
                    r2, c2 = r2 % R, c2 % C
                elif r2 >= R or c2 >= C:
                    continue
                a, b = lattice.site(r, c), lattice.site(r2, c2)
                if a == b:
                    continue
                direction = dc * _A1 + dr * _A2
                if a > b:
                    a, b, direction = b, a, -direction
                if (a, b) in seen:
                    continue
                seen.add((a, b))
                bonds.append(Bond(a, b, _dmi_vector(direction, dmi_magnitude, dmi_mode, dmi_sign)))
    bonds.sort(key=lambda bd: (bd.i, bd.j))
    return bonds


def _embed(n: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    """Tensor product with ``factors[site]`` at the given 1-based sites, identity elsewhere."""
    return reduce(np.kron, [factors.get(s, PAULI_I) for s in range(1, n + 1)])


@dataclass(frozen=True)
class SpinOperators:
    """Site spin operators S_i^v = I x ... x (hbar/2) sigma_v x ... x I.

    Matrices are built on demand: ``ops[i, "x"]`` or ``ops.site(i, "x")``.
    Storing all 3n of them up front would cost 3n * 4^n complex entries.
    """

    n: int
    hbar: float = PhysicalConstants.hbar
    _totals: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return 2**self.n

    def _check(self, i, axis):
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"site {i} outside 1..{self.n}")
        if axis not in PAULI:
            raise IndexOutOfRange(f"unknown axis {axis!r}")

    def site(self, i: int, axis: str) -> np.ndarray:
        self._check(i, axis)
        return _embed(self.n, {i: 0.5 * self.hbar * PAULI[axis]})

    def __getitem__(self, key: tuple[int, str]) -> np.ndarray:
        return self.site(*key)

    def product(self, i: int, a: str, j: int, b: str) -> np.ndarray:
        """S_i^a S_j^b for i != j, assembled directly as a tensor product."""
        self._check(i, a)
        self._check(j, b)
        if i == j:
            return self.site(i, a) @ self.site(j, b)
        s = 0.5 * self.hbar
        return _embed(self.n, {i: s * PAULI[a], j: s * PAULI[b]})

    def total(self, axis: str) -> np.ndarray:
        """sum_i S_i^axis (cached)."""
        if axis not in self._totals:
            self._check(1, axis)
            self._totals[axis] = sum(self.site(i, axis) for i in range(1, self.n + 1))
        return self._totals[axis]


def build_spin_operators(n: int, hbar: float = PhysicalConstants.hbar) -> SpinOperators:
    if n < 1:
        raise IndexOutOfRange(f"need at least one site, got n={n}")
    if 2**n > MAX_DIM:
        raise DimensionOverflow(f"2**{n} exceeds the dense dimension cap {MAX_DIM}")
    return SpinOperators(n, hbar)


@dataclass(frozen=True)
class HamiltonianSpec:
    J: float = 1.0
    dmi_magnitude: float = 0.8
    dmi_mode: Literal["inplane_perp", "z_aligned"] = "inplane_perp"
    B: tuple[float, float, float] = (0.0, 0.0, 1.0)
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    dmi_sign: int = 1

    def __post_init__(self):
        vals = [self.J, self.dmi_magnitude, *self.B]
        if not all(math.isfinite(v) for v in vals):
            raise InvalidLattice("Hamiltonian parameters must be finite")
        if self.dmi_magnitude < 0:
            raise InvalidLattice(f"dmi_magnitude must be >= 0, got {self.dmi_magnitude}")
        if len(self.B) != 3:
            raise InvalidLattice("B must be a 3-vector")


_LEVI_CIVITA = {
    ("y", "z"): (0, 1.0), ("z", "y"): (0, -1.0),
    ("z", "x"): (1, 1.0), ("x", "z"): (1, -1.0),
    ("x", "y"): (2, 1.0), ("y", "x"): (2, -1.0),
}


def build_hamiltonian(spec: HamiltonianSpec, ops: SpinOperators, bonds: Sequence[Bond]) -> np.ndarray:
    """Assemble H (meV) from exchange, DMI and Zeeman terms."""
    n = ops.n
    if spec.lattice.n != n:
        raise DimensionMismatch(f"lattice has {spec.lattice.n} sites but operators were built for {n}")
    hbar = spec.constants.hbar
    if not math.isclose(ops.hbar, hbar):
        raise DimensionMismatch("spin operators and constants disagree on hbar")
    H = np.zeros((ops.dim, ops.dim), dtype=complex)
    for bond in bonds:
        if not (1 <= bond.i < bond.j <= n):
            raise IndexOutOfRange(f"bond ({bond.i}, {bond.j}) invalid for n={n}")
        for a in AXES:
            H += (2.0 * spec.J / hbar**2) * ops.product(bond.i, a, bond.j, a)
        for (a, b), (k, sgn) in _LEVI_CIVITA.items():
            dk = bond.d_vector[k]
            if dk != 0.0:
                H += (2.0 / hbar**2) * sgn * dk * ops.product(bond.i, a, bond.j, b)
    mu = spec.constants.mu
    for k, axis in enumerate(AXES):
        if spec.B[k] != 0.0:
            H -= mu * spec.B[k] * ops.total(axis)
    return check_hermitian(hermitize(H), "H")


def hamiltonian_from_spec(spec: HamiltonianSpec) -> tuple[np.ndarray, SpinOperators, list[Bond]]:
    """Convenience: operators, bonds and H in one call."""
    ops = build_spin_operators(spec.lattice.n, spec.constants.hbar)
    bonds = build_bonds(spec.lattice, spec.dmi_magnitude, spec.dmi_mode, spec.dmi_sign)
    return build_hamiltonian(spec, ops, bonds), ops, bonds


# initial states ---------------------------------------------------------------


def basis_state(bits: Sequence[int]) -> np.ndarray:
    """|b_1 ... b_n> with site 1 the most significant bit."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[idx] = 1.0
    return psi


def af_state(variant: int, n: int) -> np.ndarray:
    """|AF_variant> = tensor_{l=1..n} |(l + variant) mod 2>."""
    if variant not in (1, 2):
        raise IndexOutOfRange(f"AF variant must be 1 or 2, got {variant}")
    return basis_state([(l + variant) % 2 for l in range(1, n + 1)])


def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1.0 / math.sqrt(2.0)
    return psi


def w_state(n: int, hbar: float = PhysicalConstants.hbar) -> np.ndarray:
    """Normalised X|0...0> with X = 2/(hbar sqrt(n)) sum_i S_i^x.

    S_i^x |0...0> = (hbar/2) |0..1_i..0>, so the operator is applied as bit
    flips rather than through dense 2^n matrices.
    """
    psi = np.zeros(2**n, dtype=complex)
    coeff = 2.0 / (hbar * math.sqrt(n)) * (hbar / 2.0)
    for i in range(1, n + 1):
        psi[1 << (n - i)] += coeff
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class InitialStateSpec:
    """Mixture weights over (I/2^n, AF_1, AF_2, GHZ, W)."""

    p: tuple[float, float, float, float, float] = (0.0, 1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) != 5:
            raise InvalidProbabilityVector(f"p must have 5 entries, got {len(p)}")
        if any(not (0.0 <= x <= 1.0) for x in p):
            raise InvalidProbabilityVector(f"entries of p must lie in [0, 1], got {p}")
        if abs(sum(p) - 1.0) > 1e-9:
            raise InvalidProbabilityVector(f"p must sum to 1, sums to {sum(p):.12g}")
        object.__setattr__(self, "p", p)


def build_initial_state(spec: InitialStateSpec, n: int, hbar: float = PhysicalConstants.hbar) -> np.ndarray:
    N = 2**n
    if N > MAX_DIM:
        raise DimensionOverflow(f"2**{n} exceeds the dense dimension cap {MAX_DIM}")
    p0, p1, p2, p3, p4 = spec.p
    rho = (p0 / N) * np.eye(N, dtype=complex)
    for weight, psi in (
        (p1, lambda: af_state(1, n)),
        (p2, lambda: af_state(2, n)),
        (p3, lambda: ghz_state(n)),
        (p4, lambda: w_state(n, hbar)),
    ):
        if weight:
            v = psi()
            rho += weight * np.outer(v, v.conj())
    # p may miss unit sum by up to 1e-9
    return hermitize(rho) / np.trace(rho).real
