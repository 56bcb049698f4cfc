"""Command-line front end.

    qllg simulate --config run.json [--out DIR]
    qllg converge --config run.json --h 0.1,0.05,0.025 --reference exact|fine
    qllg sweep    --config run.json --param D_meV --values 0.1,0.4,0.8

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, resolve
from .dynamics import QllgContext
from .errors import ConfigError, InputError, NumericalError
from .integrators import TABLEAU_NAMES, TrajectoryRecord, integrate
from .oracle import convergence_study
from .spin_model import build_initial_state, hamiltonian_from_spec

log = logging.getLogger("qllg")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
DIAGNOSTIC_COLUMNS = (("trace", "trace"), ("purity", "trace_sq"), ("trace_cube", "trace_cube"), ("min_eig", "min_eigenvalue"))
SWEEP_PARAMS = ("J_meV", "D_meV", "B_magnitude", "kappa")


def fmt(x) -> str:
    """17 significant digits: doubles survive a text round trip."""
    return format(float(x), ".17g")


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def build_id() -> str:
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"qllg {__version__}" + (f" (git {rev})" if rev else "")


def output_path(cfg: RunConfig, out_dir: str | None) -> Path:
    p = Path(cfg.output_path)
    return Path(out_dir) / p.name if out_dir else p


def prepare(cfg: RunConfig):
    """Hamiltonian, context, initial state and bound observers for a config."""
    H, ops, _ = hamiltonian_from_spec(cfg.hamiltonian)
    ctx = QllgContext(H, cfg.kappa, cfg.hamiltonian.constants.hbar)
    rho0 = build_initial_state(cfg.initial_state, cfg.n, cfg.hamiltonian.constants.hbar)
    observers = {spec.column: spec.bind(H, ops) for spec in cfg.observables}
    return ctx, rho0, observers


def trajectory_csv(record: TrajectoryRecord, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_ps", *columns, *(c for c, _ in DIAGNOSTIC_COLUMNS)])
    for k, t in enumerate(record.times):
        d = record.diagnostics[k]
        row = [fmt(t)]
        row += [fmt(record.observables[c][k]) for c in columns]
        row += [fmt(getattr(d, attr)) for _, attr in DIAGNOSTIC_COLUMNS]
        w.writerow(row)
    return buf.getvalue()


def simulate(cfg: RunConfig, out_dir: str | None = None) -> dict:
    """Run one trajectory, write CSV + sidecar; returns the sidecar content."""
    path = output_path(cfg, out_dir)
    start = time.perf_counter()
    ctx, rho0, observers = prepare(cfg)
    status, error = "ok", None
    try:
        record = integrate(rho0, ctx, cfg.integrator, observers)
    except NumericalError as exc:
        status, error = "failed", f"{type(exc).__name__}: {exc}"
        record = exc.record or TrajectoryRecord()
    atomic_write(path, trajectory_csv(record, list(observers)))
    sidecar = {
        "resolved_config": cfg.resolved,
        "build": build_id(),
        "wall_time_s": time.perf_counter() - start,
        "status": status,
        "error": error,
        "rows": len(record.times),
        "csv": str(path),
    }
    write_json(path.with_suffix(".json"), sidecar)
    return sidecar


def parse_floats(text: str, key: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(key, "values must be finite")
    return vals


# converge ---------------------------------------------------------------------


def converge(cfg: RunConfig, h_list, reference: str, methods, families, out_dir=None) -> dict:
    if not h_list:
        raise ConfigError("--h", "need at least one step size")
    if any(h <= 0 for h in h_list):
        raise ConfigError("--h", "step sizes must be positive")
    h_list = sorted(set(h_list), reverse=True)
    ctx, rho0, _ = prepare(cfg)
    ref = {"exact": "exact_rank1", "fine": "fine_rk4"}[reference]
    t_final = cfg.integrator.t_final
    if t_final <= 0:
        raise ConfigError("dynamics.t_final_ps", "convergence study needs t_final > 0")
    pairs = [(m, c) for c in families for m in methods]
    try:
        report = convergence_study(rho0, ctx, pairs, h_list, t_final, ref)
    except InputError as exc:
        key = "initial_state.p" if ref == "exact_rank1" else "--h"
        raise ConfigError(key, str(exc)) from None

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "conservative", "h", "error_frobenius", "pairwise_order"])
    for r in report.results:
        for h, e, q in zip(report.h_list, r.errors, r.pairwise_orders):
            w.writerow([r.method, str(r.conservative).lower(), fmt(h), fmt(e), "" if q is None else fmt(q)])
    base = output_path(cfg, out_dir)
    csv_path = base.with_name(base.stem + "_convergence.csv")
    atomic_write(csv_path, buf.getvalue())
    summary = {
        "resolved_config": cfg.resolved,
        "build": build_id(),
        "reference": ref,
        "t_final_ps": t_final,
        "h_list": report.h_list,
        "slopes": {r.label: r.slope for r in report.results},
        "conserved": {r.label: r.conserved for r in report.results},
        "csv": str(csv_path),
    }
    write_json(csv_path.with_suffix(".json"), summary)
    return summary


# sweep ------------------------------------------------------------------------


def value_token(v: float) -> str:
    return repr(float(v))


def apply_sweep_value(document: dict, param: str, value: float) -> dict:
    doc = copy.deepcopy(document)
    if param == "kappa":
        doc["dynamics"]["kappa"] = value
    elif param == "B_magnitude":
        B = np.asarray(doc["hamiltonian"]["B_tesla"], dtype=float)
        norm = np.linalg.norm(B)
        unit = B / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        doc["hamiltonian"]["B_tesla"] = [float(x) for x in value * unit]
    else:
        doc["hamiltonian"][param] = value
    return doc


def _sweep_one(document: dict, out_dir: str | None) -> dict:
    try:
        cfg = resolve(document)
    except ConfigError as exc:
        return {"status": "config_error", "error": str(exc)}
    try:
        side = simulate(cfg, out_dir)
    except InputError as exc:
        return {"status": "config_error", "error": str(exc)}
    return {"status": side["status"], "error": side["error"], "csv": side["csv"]}


def worker_count(jobs: int) -> int:
    cap = os.environ.get("QLLG_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, int(cap))
        except ValueError:
            raise ConfigError("QLLG_THREADS", f"expected an integer, got {cap!r}") from None
    return max(1, min(n, jobs))


def sweep(cfg: RunConfig, param: str, values, out_dir=None) -> dict:
    if param not in SWEEP_PARAMS:
        raise ConfigError("--param", f"must be one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    if not values:
        raise ConfigError("--values", "empty value list")
    base = output_path(cfg, out_dir)
    stem = base.with_suffix("")
    docs = []
    for v in values:
        doc = apply_sweep_value(cfg.resolved, param, v)
        doc["output"]["path"] = str(stem) + f"_{param}={value_token(v)}.csv"
        docs.append(doc)
    # validate everything up front so a typo fails before any work is done
    for v, doc in zip(values, docs):
        try:
            resolve(doc)
        except ConfigError as exc:
            raise ConfigError("--values", f"{param}={value_token(v)}: {exc}") from None

    workers = worker_count(len(docs))
    if workers == 1:
        results = [_sweep_one(d, None) for d in docs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, docs, [None] * len(docs)))
    entries = [{"param": param, "value": v, **r} for v, r in zip(values, results)]
    manifest = {
        "resolved_config": cfg.resolved,
        "build": build_id(),
        "param": param,
        "values": list(values),
        "runs": entries,
    }
    write_json(Path(str(stem) + f"_sweep_{param}.json"), manifest)
    return manifest


# entry point ------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qllg", description="Quantum LLG spin dynamics")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides the directory of output.path)")

    p = sub.add_parser("converge", help="step-size convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--h", required=True, help="comma-separated step sizes in ps")
    p.add_argument("--reference", choices=("exact", "fine"), default="exact")
    p.add_argument("--methods", default=",".join(TABLEAU_NAMES))
    p.add_argument(
        "--family",
        choices=("config", "conservative", "standard", "both"),
        default="config",
        help="which RK family to study; 'config' follows dynamics.conservative",
    )
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="one trajectory per parameter value")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--out")
    return ap


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            side = simulate(cfg, args.out)
            if side["status"] != "ok":
                print(f"qllg: numerical failure: {side['error']}", file=sys.stderr)
                return EXIT_NUMERICAL
            log.info("wrote %s (%d rows)", side["csv"], side["rows"])
            return EXIT_OK
        if args.command == "converge":
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            bad = [m for m in methods if m not in TABLEAU_NAMES]
            if bad or not methods:
                raise ConfigError("--methods", f"unknown method(s) {bad}")
            families = {
                "config": [cfg.integrator.conservative],
                "conservative": [True],
                "standard": [False],
                "both": [False, True],
            }[args.family]
            summary = converge(cfg, parse_floats(args.h, "--h"), args.reference, methods, families, args.out)
            for label, slope in summary["slopes"].items():
                log.info("%s: slope %s", label, "n/a" if slope is None else f"{slope:.3f}")
            return EXIT_OK
        manifest = sweep(cfg, args.param, parse_floats(args.values, "--values"), args.out)
        failed = [r for r in manifest["runs"] if r["status"] != "ok"]
        for r in failed:
            print(f"qllg: {args.param}={r['value']}: {r['error']}", file=sys.stderr)
        return EXIT_NUMERICAL if failed else EXIT_OK
    except ConfigError as exc:
        print(f"qllg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"qllg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qllg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
