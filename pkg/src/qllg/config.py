"""JSON run configuration.

Every key carries its unit in the name. Unknown keys are rejected, and every
error names the dotted path of the offending entry. Defaults reproduce the
many-body setup: 3x3 periodic triangular lattice, |J| = 1 meV, in-plane DMI
of 0.8 meV, B = 1 T along z, kappa = 0.5, conservative RK4 with h = 0.02 ps.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError, InputError
from .integrators import TABLEAU_NAMES, IntegratorConfig, preset_tableau
from .observables import ObservableSpec
from .spin_model import HamiltonianSpec, InitialStateSpec, LatticeSpec, PhysicalConstants

DEFAULTS: dict[str, Any] = {
    "lattice": {"geometry": "triangular", "rows": 3, "cols": 3, "periodic": True},
    "hamiltonian": {
        "J_meV": 1.0,
        "D_meV": 0.8,
        "dmi_mode": "inplane_perp",
        "dmi_sign": 1,
        "B_tesla": [0.0, 0.0, 1.0],
    },
    "constants": {"hbar_meV_ps": 0.658, "mu_B_meV_per_tesla": 5.8e-2, "g": 2.0},
    "dynamics": {
        "kappa": 0.5,
        "h_ps": 0.02,
        "t_final_ps": 1.0,
        "method": "rk4",
        "conservative": True,
        "sample_stride": 1,
    },
    "initial_state": {"p": [0.0, 1.0, 0.0, 0.0, 0.0]},
    "observables": ["energy", "magnetization_x", "magnetization_y", "magnetization_z", "concurrence_1_2"],
    "output": {"path": "trajectory.csv", "format": "csv"},
}


def _merge(defaults: dict, given: dict, prefix: str) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(prefix or "<root>", "expected a JSON object")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in defaults:
            raise ConfigError(path, "unknown key")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, path)
        else:
            out[key] = value
    return out


def _number(raw: dict, section: str, key: str, *, positive=False, nonneg=False) -> float:
    v = raw[section][key]
    path = f"{section}.{key}"
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(path, f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(path, f"must be > 0, got {v}")
    if nonneg and v < 0:
        raise ConfigError(path, f"must be >= 0, got {v}")
    return float(v)


def _integer(raw: dict, section: str, key: str, minimum: int) -> int:
    v = raw[section][key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{section}.{key}", f"expected an integer >= {minimum}, got {v!r}")
    return v


def _boolean(raw: dict, section: str, key: str) -> bool:
    v = raw[section][key]
    if not isinstance(v, bool):
        raise ConfigError(f"{section}.{key}", f"expected true/false, got {v!r}")
    return v


def _vector(raw: dict, section: str, key: str, length: int) -> tuple[float, ...]:
    v = raw[section][key]
    path = f"{section}.{key}"
    if not isinstance(v, list) or len(v) != length:
        raise ConfigError(path, f"expected a list of {length} numbers, got {v!r}")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) for x in v):
        raise ConfigError(path, f"entries must be finite numbers, got {v!r}")
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration plus the fully resolved JSON it came from."""

    resolved: dict
    hamiltonian: HamiltonianSpec
    kappa: float
    integrator: IntegratorConfig
    initial_state: InitialStateSpec
    observables: tuple[ObservableSpec, ...]
    output_path: str

    @property
    def n(self) -> int:
        return self.hamiltonian.lattice.n


def resolve(document: dict) -> RunConfig:
    """Merge ``document`` over the defaults and validate every entry."""
    if isinstance(document, dict) and "resolved_config" in document:
        # a sidecar written by a previous run
        document = document["resolved_config"]
    raw = _merge(DEFAULTS, document, "")

    lat = raw["lattice"]
    if lat["geometry"] not in ("triangular", "pair"):
        raise ConfigError("lattice.geometry", f"must be 'triangular' or 'pair', got {lat['geometry']!r}")
    rows = _integer(raw, "lattice", "rows", 1)
    cols = _integer(raw, "lattice", "cols", 1)
    periodic = _boolean(raw, "lattice", "periodic")
    try:
        lattice = LatticeSpec(rows, cols, periodic, lat["geometry"])
    except InputError as exc:
        raise ConfigError("lattice", str(exc)) from None

    const = PhysicalConstants(
        hbar=_number(raw, "constants", "hbar_meV_ps", positive=True),
        mu_B=_number(raw, "constants", "mu_B_meV_per_tesla"),
        g=_number(raw, "constants", "g"),
    )

    ham = raw["hamiltonian"]
    if ham["dmi_mode"] not in ("inplane_perp", "z_aligned"):
        raise ConfigError("hamiltonian.dmi_mode", f"must be 'inplane_perp' or 'z_aligned', got {ham['dmi_mode']!r}")
    if ham["dmi_sign"] not in (1, -1) or isinstance(ham["dmi_sign"], bool):
        raise ConfigError("hamiltonian.dmi_sign", f"must be 1 or -1, got {ham['dmi_sign']!r}")
    hspec = HamiltonianSpec(
        J=_number(raw, "hamiltonian", "J_meV"),
        dmi_magnitude=_number(raw, "hamiltonian", "D_meV", nonneg=True),
        dmi_mode=ham["dmi_mode"],
        B=_vector(raw, "hamiltonian", "B_tesla", 3),
        lattice=lattice,
        constants=const,
        dmi_sign=ham["dmi_sign"],
    )

    dyn = raw["dynamics"]
    kappa = _number(raw, "dynamics", "kappa", nonneg=True)
    if dyn["method"] not in TABLEAU_NAMES:
        raise ConfigError("dynamics.method", f"must be one of {', '.join(TABLEAU_NAMES)}, got {dyn['method']!r}")
    try:
        integ = IntegratorConfig(
            tableau=preset_tableau(dyn["method"]),
            conservative=_boolean(raw, "dynamics", "conservative"),
            h=_number(raw, "dynamics", "h_ps", positive=True),
            t_final=_number(raw, "dynamics", "t_final_ps", nonneg=True),
            sample_stride=_integer(raw, "dynamics", "sample_stride", 1),
        )
    except InputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("dynamics.h_ps", str(exc)) from None

    try:
        init = InitialStateSpec(_vector(raw, "initial_state", "p", 5))
    except InputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("initial_state.p", str(exc)) from None

    if not isinstance(raw["observables"], list):
        raise ConfigError("observables", "expected a list of names")
    obs = []
    for k, name in enumerate(raw["observables"]):
        try:
            spec = ObservableSpec.parse(str(name))
            if spec.kind == "concurrence" and spec.sites[1] > lattice.n:
                raise InputError(f"site {spec.sites[1]} exceeds n={lattice.n}")
        except InputError as exc:
            raise ConfigError(f"observables[{k}]", str(exc)) from None
        obs.append(spec)

    out = raw["output"]
    if out["format"] != "csv":
        raise ConfigError("output.format", f"only 'csv' is supported, got {out['format']!r}")
    if not isinstance(out["path"], str) or not out["path"]:
        raise ConfigError("output.path", "expected a non-empty string")

    return RunConfig(raw, hspec, kappa, integ, init, tuple(obs), out["path"])


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return resolve(document)
